"""Derived analyses over master-summary rows.

Every operation here is a pure function of the summary rows (live bench
output or the shipped reference transcription): baseline normalization,
the leaf-only campaign pairing, placement-class summaries, depth and KEX
pairings, transport-versus-latency correlations, counterexample mining,
regime labels, the capacity model, the economic model and the
plausibility ranking.  Decoupling analysis from measurement is what makes
table-exact regression tests possible on fixture data.
"""

from __future__ import annotations

import csv
import enum
import statistics
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .bench import CSV_COLUMNS, RunAggregate, read_master_summary
from .config import AnalysisConfig
from .scenario import (
    Placement,
    SigFamily,
    classify_placement,
    compose_scenario_id,
    conceptual_perf_group,
    parse_scenario_id,
)


class SchemaError(Exception):
    """Input rows do not carry the master-summary column set."""


def load_summary(path: Path | str) -> list[RunAggregate]:
    with open(path, newline="") as f:
        header = next(csv.reader(f), None)
    if header is None:
        raise SchemaError(f"{path}: empty input")
    missing = sorted(set(CSV_COLUMNS) - set(header))
    if missing:
        raise SchemaError(f"{path}: missing columns {', '.join(missing)}")
    try:
        return read_master_summary(path)
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def _placement(row: RunAggregate) -> Placement:
    return parse_scenario_id(row.scenario_id)[1]


class _Rows:
    """Index rows by canonical id so legacy aliases resolve too."""

    def __init__(self, rows: Sequence[RunAggregate]):
        self.rows = list(rows)
        self.by_id: dict[str, RunAggregate] = {}
        for row in rows:
            kex, placement = parse_scenario_id(row.scenario_id)
            self.by_id[row.scenario_id] = row
            self.by_id[compose_scenario_id(kex, placement)] = row

    def get(self, scenario_id: str) -> Optional[RunAggregate]:
        row = self.by_id.get(scenario_id)
        if row is None:
            try:
                kex, placement = parse_scenario_id(scenario_id)
            except ValueError:
                return None
            row = self.by_id.get(compose_scenario_id(kex, placement))
        return row

    def require(self, scenario_id: str) -> RunAggregate:
        row = self.get(scenario_id)
        if row is None:
            raise KeyError(f"scenario {scenario_id!r} not present in input")
        return row


# --- normalization -------------------------------------------------------


@dataclass(frozen=True)
class NormalizedRow:
    scenario_id: str
    slh_position_class: str
    latency_relative_to_baseline: float
    bytes_read_relative_to_baseline: float
    server_cpu_relative_to_baseline: float


def slh_position_class(placement: Placement) -> str:
    positions = []
    if placement.root is SigFamily.SLH_DSA_SHAKE_192S:
        positions.append("root")
    if placement.intermediate is SigFamily.SLH_DSA_SHAKE_192S:
        positions.append("intermediate")
    if placement.leaf is SigFamily.SLH_DSA_SHAKE_192S:
        positions.append("leaf")
    return "_and_".join(positions) if positions else "no_slh"


def hierarchy_label(placement: Placement) -> str:
    parts = [f"{placement.root.token.upper()} root"]
    if placement.intermediate is not None:
        parts.append(f"{placement.intermediate.token.upper()} int")
    parts.append(f"{placement.leaf.token.upper()} leaf")
    return " / ".join(parts)


def normalize_to_baseline(
    rows: Sequence[RunAggregate], baseline_id: str
) -> list[NormalizedRow]:
    index = _Rows(rows)
    base = index.require(baseline_id)
    out = []
    for row in rows:
        out.append(
            NormalizedRow(
                scenario_id=row.scenario_id,
                slh_position_class=slh_position_class(_placement(row)),
                latency_relative_to_baseline=row.mean_ms / base.mean_ms,
                bytes_read_relative_to_baseline=row.bytes_read / base.bytes_read,
                server_cpu_relative_to_baseline=row.server_task_ms / base.server_task_ms,
            )
        )
    return out


# --- campaign A pairing ----------------------------------------------------


@dataclass(frozen=True)
class LeafPairRow:
    kex_mode: str
    tls_group: str
    ml_elapsed_ms: float
    slh_elapsed_ms: float
    latency_ratio: float
    ml_bytes_read: float
    slh_bytes_read: float
    bytes_read_ratio: float
    ml_server_task_ms: float
    slh_server_task_ms: float
    server_taskclock_ratio: float
    ml_client_task_ms: float
    slh_client_task_ms: float
    client_taskclock_ratio: float


def campaign_a_pairs(rows: Sequence[RunAggregate]) -> list[LeafPairRow]:
    """SLH/ML ratios for the leaf-only contrast, per KEX mode."""
    pairs: dict[str, dict[SigFamily, RunAggregate]] = {}
    for row in rows:
        if row.campaign != "A":
            continue
        kex, placement = parse_scenario_id(row.scenario_id)
        pairs.setdefault(kex.tls_group_label, {})[placement.leaf] = row
    out = []
    for group, members in sorted(pairs.items()):
        if len(members) != 2:
            raise KeyError(f"campaign A pair incomplete for group {group}")
        ml = members[SigFamily.ML_DSA_65]
        slh = members[SigFamily.SLH_DSA_SHAKE_192S]
        out.append(
            LeafPairRow(
                kex_mode=ml.kex_mode,
                tls_group=group,
                ml_elapsed_ms=ml.mean_ms,
                slh_elapsed_ms=slh.mean_ms,
                latency_ratio=slh.mean_ms / ml.mean_ms,
                ml_bytes_read=ml.bytes_read,
                slh_bytes_read=slh.bytes_read,
                bytes_read_ratio=slh.bytes_read / ml.bytes_read,
                ml_server_task_ms=ml.server_task_ms,
                slh_server_task_ms=slh.server_task_ms,
                server_taskclock_ratio=slh.server_task_ms / ml.server_task_ms,
                ml_client_task_ms=ml.client_task_ms,
                slh_client_task_ms=slh.client_task_ms,
                client_taskclock_ratio=slh.client_task_ms / ml.client_task_ms,
            )
        )
    return out


# --- placement summary ------------------------------------------------------


PLACEMENT_CLASSES = ("all_ml", "root_slh_leaf_not_slh", "intermediate_slh_any", "leaf_slh")


@dataclass(frozen=True)
class PlacementSummaryRow:
    placement_class: str
    n_scenarios: int
    mean_elapsed_ms: float
    median_elapsed_ms: float
    min_elapsed_ms: float
    max_elapsed_ms: float
    mean_latency_vs_baseline: float
    median_latency_vs_baseline: float
    mean_bytes_vs_baseline: float
    mean_server_cpu_vs_baseline: float
    mean_server_over_elapsed: float
    mean_client_over_elapsed: float


def placement_summary(
    rows: Sequence[RunAggregate], baseline_id: str
) -> list[PlacementSummaryRow]:
    """Per-class statistics; a scenario contributes to every class it flags."""
    base = _Rows(rows).require(baseline_id)
    out = []
    for class_name in PLACEMENT_CLASSES:
        members = [
            row for row in rows if getattr(classify_placement(_placement(row)), class_name)
        ]
        if not members:
            continue
        elapsed = [m.mean_ms for m in members]
        out.append(
            PlacementSummaryRow(
                placement_class=class_name,
                n_scenarios=len(members),
                mean_elapsed_ms=statistics.fmean(elapsed),
                median_elapsed_ms=statistics.median(elapsed),
                min_elapsed_ms=min(elapsed),
                max_elapsed_ms=max(elapsed),
                mean_latency_vs_baseline=statistics.fmean(
                    m.mean_ms / base.mean_ms for m in members
                ),
                median_latency_vs_baseline=statistics.median(
                    m.mean_ms / base.mean_ms for m in members
                ),
                mean_bytes_vs_baseline=statistics.fmean(
                    m.bytes_read / base.bytes_read for m in members
                ),
                mean_server_cpu_vs_baseline=statistics.fmean(
                    m.server_task_ms / base.server_task_ms for m in members
                ),
                mean_server_over_elapsed=statistics.fmean(
                    m.server_over_elapsed for m in members
                ),
                mean_client_over_elapsed=statistics.fmean(
                    m.client_over_elapsed for m in members
                ),
            )
        )
    return out


# --- depth pairs -------------------------------------------------------------


DEPTH_PAIR_MAP = [
    ("ML/ML", "x25519mlkem768__ml_root__ml_leaf", "x25519mlkem768__ml_root__ml_int__ml_leaf"),
    (
        "SLH root + ML leaf",
        "x25519mlkem768__slh_root__ml_leaf",
        "x25519mlkem768__slh_root__ml_int__ml_leaf",
    ),
    (
        "ML root + SLH leaf (ML intermediate)",
        "x25519mlkem768__ml_root__slh_leaf",
        "x25519mlkem768__ml_root__ml_int__slh_leaf",
    ),
    (
        "ML root + SLH leaf (SLH intermediate)",
        "x25519mlkem768__ml_root__slh_leaf",
        "x25519mlkem768__ml_root__slh_int__slh_leaf",
    ),
    (
        "SLH/SLH (ML intermediate)",
        "x25519mlkem768__slh_root__slh_leaf",
        "x25519mlkem768__slh_root__ml_int__slh_leaf",
    ),
    (
        "SLH/SLH (SLH intermediate)",
        "x25519mlkem768__slh_root__slh_leaf",
        "x25519mlkem768__slh_root__slh_int__slh_leaf",
    ),
]


@dataclass(frozen=True)
class DepthPairRow:
    pair_label: str
    depth2_id: str
    depth3_id: str
    depth2_elapsed_ms: float
    depth3_elapsed_ms: float
    delta_elapsed_ms: float
    latency_ratio: float
    delta_bytes_read: float
    delta_chain_bytes_unique: int
    delta_server_task_ms: float
    server_taskclock_ratio: float


def depth_pairs(
    rows: Sequence[RunAggregate], warn: Callable[[str], None] = lambda _m: None
) -> list[DepthPairRow]:
    """Depth-2 vs depth-3 contrasts over the fixed comparable-family map."""
    index = _Rows(rows)
    out = []
    for label, d2_id, d3_id in DEPTH_PAIR_MAP:
        d2 = index.get(d2_id)
        d3 = index.get(d3_id)
        if d2 is None or d3 is None:
            warn(f"depth pair {label!r} skipped: missing member")
            continue
        out.append(
            DepthPairRow(
                pair_label=label,
                depth2_id=d2.scenario_id,
                depth3_id=d3.scenario_id,
                depth2_elapsed_ms=d2.mean_ms,
                depth3_elapsed_ms=d3.mean_ms,
                delta_elapsed_ms=d3.mean_ms - d2.mean_ms,
                latency_ratio=d3.mean_ms / d2.mean_ms,
                delta_bytes_read=d3.bytes_read - d2.bytes_read,
                delta_chain_bytes_unique=d3.chain_bytes_unique - d2.chain_bytes_unique,
                delta_server_task_ms=d3.server_task_ms - d2.server_task_ms,
                server_taskclock_ratio=d3.server_task_ms / d2.server_task_ms,
            )
        )
    return out


# --- KEX pairs ---------------------------------------------------------------


KEX_PAIR_MAP = [
    (
        "classical_vs_hybrid",
        "ML root / ML leaf (depth 2)",
        "x25519__leaf_mldsa65",
        "x25519mlkem768__leaf_mldsa65",
    ),
    (
        "classical_vs_hybrid",
        "SLH root / SLH leaf (depth 2)",
        "x25519__leaf_slhdsashake192s",
        "x25519mlkem768__leaf_slhdsashake192s",
    ),
    (
        "hybrid_vs_pure_pqc",
        "ML root / ML leaf (depth 2)",
        "x25519mlkem768__ml_root__ml_leaf",
        "mlkem768__ml_root__ml_leaf",
    ),
    (
        "hybrid_vs_pure_pqc",
        "SLH root / ML int / ML leaf (depth 3)",
        "x25519mlkem768__slh_root__ml_int__ml_leaf",
        "mlkem768__slh_root__ml_int__ml_leaf",
    ),
    (
        "hybrid_vs_pure_pqc",
        "SLH root / SLH leaf (depth 2)",
        "x25519mlkem768__slh_root__slh_leaf",
        "mlkem768__slh_root__slh_leaf",
    ),
]


@dataclass(frozen=True)
class KexPairRow:
    comparison_type: str
    family_label: str
    from_kex_mode: str
    to_kex_mode: str
    leaf_family: str
    depth: int
    elapsed_mean_from_ms: float
    elapsed_mean_to_ms: float
    latency_ratio_to_over_from: float
    bytes_read_from: float
    bytes_read_to: float
    bytes_read_ratio_to_over_from: float
    server_task_from_ms: float
    server_task_to_ms: float
    server_task_ratio_to_over_from: float


def kex_pairs(
    rows: Sequence[RunAggregate], warn: Callable[[str], None] = lambda _m: None
) -> list[KexPairRow]:
    """Classical->hybrid and hybrid->pure contrasts on comparable chains."""
    index = _Rows(rows)
    out = []
    for comparison, label, from_id, to_id in KEX_PAIR_MAP:
        src = index.get(from_id)
        dst = index.get(to_id)
        if src is None or dst is None:
            warn(f"kex pair {label!r} ({comparison}) skipped: missing member")
            continue
        placement = _placement(src)
        out.append(
            KexPairRow(
                comparison_type=comparison,
                family_label=label,
                from_kex_mode=src.kex_mode,
                to_kex_mode=dst.kex_mode,
                leaf_family=placement.leaf.value,
                depth=src.depth,
                elapsed_mean_from_ms=src.mean_ms,
                elapsed_mean_to_ms=dst.mean_ms,
                latency_ratio_to_over_from=dst.mean_ms / src.mean_ms,
                bytes_read_from=src.bytes_read,
                bytes_read_to=dst.bytes_read,
                bytes_read_ratio_to_over_from=dst.bytes_read / src.bytes_read,
                server_task_from_ms=src.server_task_ms,
                server_task_to_ms=dst.server_task_ms,
                server_task_ratio_to_over_from=dst.server_task_ms / src.server_task_ms,
            )
        )
    return out


# --- correlations ------------------------------------------------------------


SUBSETS = ("all_scenarios", "non_leaf_slh", "leaf_slh_only")
CORRELATION_METRICS = ("bytes_read", "chain_bytes_unique")


def _subset(rows: Sequence[RunAggregate], name: str) -> list[RunAggregate]:
    if name == "all_scenarios":
        return list(rows)
    leaf_slh = [
        r for r in rows if _placement(r).leaf is SigFamily.SLH_DSA_SHAKE_192S
    ]
    if name == "leaf_slh_only":
        return leaf_slh
    if name == "non_leaf_slh":
        excluded = {id(r) for r in leaf_slh}
        return [r for r in rows if id(r) not in excluded]
    raise ValueError(f"unknown subset {name!r}")


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Two-pass mean-centered Pearson correlation.

    The centered values are rescaled by their largest magnitude before the
    products; this leaves the result unchanged algebraically but keeps the
    sums out of under/overflow territory for extreme inputs.
    """
    if len(x) != len(y) or len(x) < 3:
        raise ValueError("need at least 3 paired observations")
    ax = np.asarray(x, dtype=float)
    ay = np.asarray(y, dtype=float)
    dx = ax - ax.mean()
    dy = ay - ay.mean()
    sx = float(np.abs(dx).max())
    sy = float(np.abs(dy).max())
    if sx == 0.0 or sy == 0.0:
        raise ValueError("degenerate variance")
    dx /= sx
    dy /= sy
    denom = float(np.sqrt((dx * dx).sum() * (dy * dy).sum()))
    if denom == 0.0:
        raise ValueError("degenerate variance")
    return float((dx * dy).sum() / denom)


def average_ranks(values: Sequence[float]) -> list[float]:
    """Ranks 1..n with ties averaged."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson on average-ranked data."""
    return pearson(average_ranks(x), average_ranks(y))


@dataclass(frozen=True)
class CorrelationRow:
    subset: str
    n_scenarios: int
    metric: str
    pearson_r: float
    spearman_rho: float


def correlations(
    rows: Sequence[RunAggregate],
    subset: str = "all_scenarios",
    metric: str = "bytes_read",
) -> CorrelationRow:
    members = _subset(rows, subset)
    xs = [float(getattr(r, metric)) for r in members]
    ys = [r.mean_ms for r in members]
    return CorrelationRow(
        subset=subset,
        n_scenarios=len(members),
        metric=metric,
        pearson_r=pearson(xs, ys),
        spearman_rho=spearman(xs, ys),
    )


def correlation_table(rows: Sequence[RunAggregate]) -> list[CorrelationRow]:
    return [
        correlations(rows, subset, metric)
        for subset in SUBSETS
        for metric in CORRELATION_METRICS
    ]


# --- counterexamples -----------------------------------------------------------


@dataclass(frozen=True)
class CounterexampleRow:
    rank: int
    transport_metric: str
    scenario_more_bytes_lower_latency: str
    scenario_less_bytes_higher_latency: str
    more_bytes_value: float
    less_bytes_value: float
    bytes_diff: float
    lower_latency_ms: float
    higher_latency_ms: float
    latency_ratio_higher_over_lower: float


def counterexamples(
    rows: Sequence[RunAggregate],
    metric: str = "bytes_read",
    top_k: int = 5,
    min_latency_ratio: float = 2.0,
) -> list[CounterexampleRow]:
    """Ordered pairs where more transported bytes coincide with lower latency,
    ranked by the byte gap.

    ``min_latency_ratio`` keeps only pairs whose fewer-bytes member is
    materially slower; without it, jitter-level inversions inside one
    latency regime would dominate the ranking by sheer byte volume.
    """
    found = []
    for a in rows:
        for b in rows:
            ma, mb = float(getattr(a, metric)), float(getattr(b, metric))
            if ma > mb and a.mean_ms < b.mean_ms and b.mean_ms >= min_latency_ratio * a.mean_ms:
                found.append((a, b, ma, mb))
    found.sort(key=lambda item: (-(item[2] - item[3]), item[0].scenario_id, item[1].scenario_id))
    out = []
    for rank, (a, b, ma, mb) in enumerate(found[:top_k], start=1):
        out.append(
            CounterexampleRow(
                rank=rank,
                transport_metric=metric,
                scenario_more_bytes_lower_latency=a.scenario_id,
                scenario_less_bytes_higher_latency=b.scenario_id,
                more_bytes_value=ma,
                less_bytes_value=mb,
                bytes_diff=ma - mb,
                lower_latency_ms=a.mean_ms,
                higher_latency_ms=b.mean_ms,
                latency_ratio_higher_over_lower=b.mean_ms / a.mean_ms,
            )
        )
    return out


# --- regimes -------------------------------------------------------------------


class RegimeLabel(enum.Enum):
    BALANCED = "balanced"
    CLIENT_SKEWED = "client_skewed"
    OVERWHELMINGLY_SERVER_BOUND = "overwhelmingly_server_bound"


def regime_label(row: RunAggregate, cfg: AnalysisConfig = AnalysisConfig()) -> RegimeLabel:
    ratio = row.srv_cli_ratio
    if ratio > cfg.regime_server_bound_ratio:
        return RegimeLabel.OVERWHELMINGLY_SERVER_BOUND
    if ratio < cfg.regime_client_skewed_ratio:
        return RegimeLabel.CLIENT_SKEWED
    return RegimeLabel.BALANCED


@dataclass(frozen=True)
class DecompositionRow:
    scenario_id: str
    elapsed_mean_ms: float
    client_task_clock_per_run_ms: float
    server_task_clock_per_run_ms: float
    client_taskclock_over_elapsed: float
    server_taskclock_over_elapsed: float
    server_client_taskclock_ratio: float
    qualitative_perf_regime: str


def decomposition_table(
    rows: Sequence[RunAggregate], cfg: AnalysisConfig = AnalysisConfig()
) -> list[DecompositionRow]:
    return [
        DecompositionRow(
            scenario_id=row.scenario_id,
            elapsed_mean_ms=row.mean_ms,
            client_task_clock_per_run_ms=row.client_task_ms,
            server_task_clock_per_run_ms=row.server_task_ms,
            client_taskclock_over_elapsed=row.client_over_elapsed,
            server_taskclock_over_elapsed=row.server_over_elapsed,
            server_client_taskclock_ratio=row.srv_cli_ratio,
            qualitative_perf_regime=regime_label(row, cfg).value,
        )
        for row in sorted(rows, key=lambda r: r.scenario_id)
    ]


# --- capacity model -------------------------------------------------------------


@dataclass(frozen=True)
class CapacityRow:
    scenario_id: str
    kex_mode: str
    depth: int
    handshakes_per_core_second: float
    handshakes_per_vcpu_hour: float
    capacity_retained_vs_baseline: float
    infrastructure_multiplier_needed: float
    conceptual_perf_group: str


def capacity_model(rows: Sequence[RunAggregate], baseline_id: str) -> list[CapacityRow]:
    base = _Rows(rows).require(baseline_id)
    if base.server_task_ms <= 0:
        raise ValueError("baseline server task clock must be positive")
    base_hps = 1000.0 / base.server_task_ms
    out = []
    for row in rows:
        if row.server_task_ms <= 0:
            raise ValueError(f"{row.scenario_id}: server task clock must be positive")
        hps = 1000.0 / row.server_task_ms
        retained = hps / base_hps
        out.append(
            CapacityRow(
                scenario_id=row.scenario_id,
                kex_mode=row.kex_mode,
                depth=row.depth,
                handshakes_per_core_second=hps,
                handshakes_per_vcpu_hour=hps * 3600.0,
                capacity_retained_vs_baseline=retained,
                infrastructure_multiplier_needed=1.0 / retained,
                conceptual_perf_group=conceptual_perf_group(_placement(row)),
            )
        )
    out.sort(key=lambda r: -r.handshakes_per_core_second)
    return out


# --- economic model --------------------------------------------------------------


@dataclass(frozen=True)
class EconomicRow:
    scenario_id: str
    conceptual_economic_class: str
    server_cpu_seconds_per_handshake: float
    handshakes_per_cpu_second: float
    handshakes_per_cpu_hour: float
    capacity_retained_vs_baseline: float
    capacity_loss_pct: float
    infrastructure_multiplier_needed: float
    cpu_hours_per_million: float
    cost_per_million: float
    extra_cost_per_million: float
    cost_multiplier_vs_baseline: float


def economic_model(
    rows: Sequence[RunAggregate], cfg: AnalysisConfig
) -> list[EconomicRow]:
    if cfg.price_per_cpu_hour <= 0:
        raise ValueError("price per CPU hour must be positive")
    base = _Rows(rows).require(cfg.baseline_id)
    base_cost = (base.server_task_ms * 1000.0 / 3600.0) * cfg.price_per_cpu_hour
    out = []
    for row in rows:
        cpu_seconds = row.server_task_ms / 1000.0
        cpu_hours_per_million = cpu_seconds * 1e6 / 3600.0
        cost = cpu_hours_per_million * cfg.price_per_cpu_hour
        retained = base.server_task_ms / row.server_task_ms
        out.append(
            EconomicRow(
                scenario_id=row.scenario_id,
                conceptual_economic_class=conceptual_perf_group(_placement(row)),
                server_cpu_seconds_per_handshake=cpu_seconds,
                handshakes_per_cpu_second=1000.0 / row.server_task_ms,
                handshakes_per_cpu_hour=3600.0 * 1000.0 / row.server_task_ms,
                capacity_retained_vs_baseline=retained,
                capacity_loss_pct=(1.0 - retained) * 100.0,
                infrastructure_multiplier_needed=1.0 / retained,
                cpu_hours_per_million=cpu_hours_per_million,
                cost_per_million=cost,
                extra_cost_per_million=cost - base_cost,
                cost_multiplier_vs_baseline=cost / base_cost,
            )
        )
    out.sort(key=lambda r: r.cost_per_million)
    return out


@dataclass(frozen=True)
class ServiceClassRow:
    service_class: str
    conceptual_economic_class: str
    scenarios: int
    mean_daily_cost: float
    median_daily_cost: float
    mean_extra_daily_cost: float
    median_extra_daily_cost: float
    mean_monthly_cost: float
    median_monthly_cost: float
    mean_extra_monthly_cost: float
    median_extra_monthly_cost: float
    mean_annual_cost: float
    mean_extra_annual_cost: float


def service_class_table(
    economic_rows: Sequence[EconomicRow], cfg: AnalysisConfig
) -> list[ServiceClassRow]:
    """Daily/monthly/annual translation per (service class, economic class).

    Monthly is 30 daily units, annual 365; an economic-class aggregate is
    the mean/median over its member scenarios' per-scenario costs.
    """
    out = []
    groups = sorted({r.conceptual_economic_class for r in economic_rows})
    for service_class, per_day in sorted(cfg.service_classes.items()):
        millions = per_day / 1e6
        for group in groups:
            members = [r for r in economic_rows if r.conceptual_economic_class == group]
            daily = [r.cost_per_million * millions for r in members]
            extra = [r.extra_cost_per_million * millions for r in members]
            out.append(
                ServiceClassRow(
                    service_class=service_class,
                    conceptual_economic_class=group,
                    scenarios=len(members),
                    mean_daily_cost=statistics.fmean(daily),
                    median_daily_cost=statistics.median(daily),
                    mean_extra_daily_cost=statistics.fmean(extra),
                    median_extra_daily_cost=statistics.median(extra),
                    mean_monthly_cost=30.0 * statistics.fmean(daily),
                    median_monthly_cost=30.0 * statistics.median(daily),
                    mean_extra_monthly_cost=30.0 * statistics.fmean(extra),
                    median_extra_monthly_cost=30.0 * statistics.median(extra),
                    mean_annual_cost=365.0 * statistics.fmean(daily),
                    mean_extra_annual_cost=365.0 * statistics.fmean(extra),
                )
            )
    return out


# --- plausibility ------------------------------------------------------------------


class PlausibilityLabel(enum.Enum):
    REASONABLE = ("Reasonable", 1)
    PENALIZED_BUT_PLAUSIBLE = ("Penalized but plausible", 2)
    OPERATIONALLY_PROBLEMATIC = ("Operationally problematic", 3)
    UNSUITABLE = ("Unsuitable for interactive TLS front-end", 4)

    @property
    def display(self) -> str:
        return self.value[0]

    @property
    def rank(self) -> int:
        return self.value[1]


def plausibility_label(
    latency_relative: float, cfg: AnalysisConfig = AnalysisConfig()
) -> PlausibilityLabel:
    if latency_relative <= cfg.plausibility_reasonable_max:
        return PlausibilityLabel.REASONABLE
    if latency_relative <= cfg.plausibility_penalized_max:
        return PlausibilityLabel.PENALIZED_BUT_PLAUSIBLE
    if latency_relative <= cfg.plausibility_problematic_max:
        return PlausibilityLabel.OPERATIONALLY_PROBLEMATIC
    return PlausibilityLabel.UNSUITABLE


@dataclass(frozen=True)
class PlausibilityRow:
    plausibility_rank: int
    scenario_id: str
    hierarchy_family_label: str
    slh_position_class: str
    elapsed_mean_ms: float
    server_task_clock_per_run_ms: float
    latency_relative_to_baseline: float
    operational_plausibility: str


def plausibility_rank(
    rows: Sequence[RunAggregate],
    normalized: Sequence[NormalizedRow],
    cfg: AnalysisConfig = AnalysisConfig(),
) -> list[PlausibilityRow]:
    """Scenarios ordered by latency multiplier; the rank is the label's
    severity index (scenarios sharing a label share its rank)."""
    index = _Rows(rows)
    ordered = sorted(normalized, key=lambda n: n.latency_relative_to_baseline)
    out = []
    for norm in ordered:
        row = index.require(norm.scenario_id)
        label = plausibility_label(norm.latency_relative_to_baseline, cfg)
        placement = _placement(row)
        out.append(
            PlausibilityRow(
                plausibility_rank=label.rank,
                scenario_id=norm.scenario_id,
                hierarchy_family_label=hierarchy_label(placement),
                slh_position_class=slh_position_class(placement),
                elapsed_mean_ms=row.mean_ms,
                server_task_clock_per_run_ms=row.server_task_ms,
                latency_relative_to_baseline=norm.latency_relative_to_baseline,
                operational_plausibility=label.display,
            )
        )
    return out


# --- report writing ------------------------------------------------------------------


def write_rows(rows: Sequence, path: Path | str) -> None:
    """CSV writer for any homogeneous dataclass row list (4-decimal floats)."""
    if not rows:
        Path(path).write_text("")
        return
    cols = [f.name for f in fields(rows[0])]
    lines = [",".join(cols)]
    for row in rows:
        cells = []
        for col in cols:
            value = getattr(row, col)
            if isinstance(value, float):
                cells.append(f"{value:.4f}")
            else:
                text = str(value)
                if "," in text or '"' in text:
                    text = '"' + text.replace('"', '""') + '"'
                cells.append(text)
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def run_all(
    rows: Sequence[RunAggregate],
    out_dir: Path | str,
    cfg: AnalysisConfig,
    warn: Callable[[str], None] = lambda _m: None,
) -> dict[str, list]:
    """Run every analysis and write one CSV per reproduced table."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    normalized = normalize_to_baseline(rows, cfg.baseline_id)
    campaign_b = [r for r in rows if r.campaign == "B"]
    strategy_matrix = (
        normalize_to_baseline(campaign_b, cfg.baseline_id) if campaign_b else normalized
    )
    economics = economic_model(rows, cfg)

    def attempt(fn, name):
        # partial inputs legitimately lack some pairings or subsets
        try:
            return fn()
        except (KeyError, ValueError) as exc:
            warn(f"{name} skipped: {exc}")
            return []

    results = {
        "campaignA_pairs": attempt(lambda: campaign_a_pairs(rows), "campaignA_pairs"),
        "strategy_matrix": strategy_matrix,
        "placement_summary": placement_summary(rows, cfg.baseline_id),
        "depth_pairs": depth_pairs(rows, warn),
        "kex_pairs": kex_pairs(rows, warn),
        "correlations": attempt(lambda: correlation_table(rows), "correlations"),
        "counterexamples": [
            row
            for metric in CORRELATION_METRICS
            for row in counterexamples(
                rows, metric, cfg.counterexample_top_k, cfg.counterexample_min_latency_ratio
            )
        ],
        "decomposition": decomposition_table(rows, cfg),
        "capacity": capacity_model(rows, cfg.baseline_id),
        "economics": economics,
        "service_classes": service_class_table(economics, cfg),
        "plausibility": plausibility_rank(
            rows, strategy_matrix if campaign_b else normalized, cfg
        ),
    }
    for name, table in results.items():
        write_rows(table, out_dir / f"{name}.csv")
    return results
