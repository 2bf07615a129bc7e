"""Analysis configuration: thresholds, price model, service classes.

Values live in a flat ``key = value`` text file (``#`` comments allowed);
the defaults below reproduce the published reference tables.  The regime
and plausibility cut points are calibration constants documented here
rather than measured quantities.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

BASELINE_ID = "x25519mlkem768__ml_root__ml_int__ml_leaf"


@dataclass(frozen=True)
class AnalysisConfig:
    baseline_id: str = BASELINE_ID
    price_per_cpu_hour: float = 0.04
    # handshakes per day for the illustrative deployment classes
    service_classes: dict = field(
        default_factory=lambda: {
            "small_internal": 100_000,
            "medium_api": 10_000_000,
            "high_volume_frontend": 100_000_000,
        }
    )
    # server/client task-clock ratio cut points
    regime_server_bound_ratio: float = 10.0
    regime_client_skewed_ratio: float = 0.5
    # latency-relative-to-baseline cut points
    plausibility_reasonable_max: float = 1.5
    plausibility_penalized_max: float = 20.0
    plausibility_problematic_max: float = 200.0
    counterexample_top_k: int = 5
    # a pair only counts as a counterexample when the fewer-bytes scenario is
    # materially slower; same-regime jitter pairs are not evidence
    counterexample_min_latency_ratio: float = 2.0


def load_config(path: Path | str | None) -> AnalysisConfig:
    cfg = AnalysisConfig()
    if path is None:
        return cfg
    classes = dict(cfg.service_classes)
    updates: dict = {}
    for raw_line in Path(path).read_text().splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (expected key = value): {raw_line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "baseline_id":
            updates["baseline_id"] = value
        elif key == "price_per_cpu_hour":
            updates["price_per_cpu_hour"] = float(value)
        elif key.startswith("service_class."):
            classes[key.split(".", 1)[1]] = int(float(value))
        elif key == "regime.server_bound_ratio":
            updates["regime_server_bound_ratio"] = float(value)
        elif key == "regime.client_skewed_ratio":
            updates["regime_client_skewed_ratio"] = float(value)
        elif key == "plausibility.reasonable_max":
            updates["plausibility_reasonable_max"] = float(value)
        elif key == "plausibility.penalized_max":
            updates["plausibility_penalized_max"] = float(value)
        elif key == "plausibility.problematic_max":
            updates["plausibility_problematic_max"] = float(value)
        elif key == "counterexample_top_k":
            updates["counterexample_top_k"] = int(value)
        elif key == "counterexample_min_latency_ratio":
            updates["counterexample_min_latency_ratio"] = float(value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return replace(cfg, service_classes=classes, **updates)
