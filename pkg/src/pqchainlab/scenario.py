"""Experiment matrix: scenario naming, enumeration and placement classification.

A scenario fixes three axes: the key-establishment mode, the certificate
hierarchy depth (2 or 3), and the signature family assigned to each position
(root / intermediate / leaf).  Scenario ids are compositional, e.g.
``x25519mlkem768__slh_root__ml_int__ml_leaf``.  The four measurement
campaigns (A: leaf-only contrast, B: hybrid strategy matrix, C: depth
contrast, D: KEX contrast) together cover 17 distinct scenarios.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


class SigFamily(enum.Enum):
    ML_DSA_65 = "ML-DSA-65"
    SLH_DSA_SHAKE_192S = "SLH-DSA-SHAKE-192s"

    @property
    def token(self) -> str:
        """Short positional token used inside scenario ids."""
        return "ml" if self is SigFamily.ML_DSA_65 else "slh"

    @property
    def alg_id(self) -> int:
        """Algorithm identifier used in certificate fields and key files."""
        return 1 if self is SigFamily.ML_DSA_65 else 2

    @classmethod
    def from_token(cls, token: str) -> "SigFamily":
        try:
            return _FAMILY_BY_TOKEN[token]
        except KeyError:
            raise ValueError(f"unknown signature family token {token!r}") from None

    @classmethod
    def from_alg_id(cls, alg_id: int) -> "SigFamily":
        for fam in cls:
            if fam.alg_id == alg_id:
                return fam
        raise ValueError(f"unknown signature algorithm id {alg_id}")


_FAMILY_BY_TOKEN = {"ml": SigFamily.ML_DSA_65, "slh": SigFamily.SLH_DSA_SHAKE_192S}


class KexMode(enum.Enum):
    CLASSICAL = "x25519"
    HYBRID = "x25519mlkem768"
    PURE_PQC = "mlkem768"

    @property
    def tls_group_label(self) -> str:
        return self.value

    @classmethod
    def from_label(cls, label: str) -> "KexMode":
        for mode in cls:
            if mode.value == label:
                return mode
        raise ValueError(f"unknown TLS group label {label!r}")


@dataclass(frozen=True)
class Placement:
    """Signature family per hierarchy position; no intermediate means depth 2."""

    root: SigFamily
    intermediate: Optional[SigFamily]
    leaf: SigFamily

    @property
    def depth(self) -> int:
        return 2 if self.intermediate is None else 3

    def families(self) -> tuple[SigFamily, ...]:
        if self.intermediate is None:
            return (self.root, self.leaf)
        return (self.root, self.intermediate, self.leaf)


@dataclass(frozen=True)
class PlacementClass:
    """Non-exclusive placement flags; a scenario may carry several."""

    all_ml: bool
    root_slh_leaf_not_slh: bool
    intermediate_slh_any: bool
    leaf_slh: bool

    def flags(self) -> frozenset[str]:
        return frozenset(
            name
            for name in ("all_ml", "root_slh_leaf_not_slh", "intermediate_slh_any", "leaf_slh")
            if getattr(self, name)
        )


def classify_placement(p: Placement) -> PlacementClass:
    slh = SigFamily.SLH_DSA_SHAKE_192S
    return PlacementClass(
        all_ml=all(f is SigFamily.ML_DSA_65 for f in p.families()),
        root_slh_leaf_not_slh=(p.root is slh and p.leaf is not slh),
        intermediate_slh_any=(p.intermediate is slh),
        leaf_slh=(p.leaf is slh),
    )


def conceptual_perf_group(p: Placement) -> str:
    """Three-way grouping used by the capacity and economic tables."""
    if p.leaf is SigFamily.SLH_DSA_SHAKE_192S:
        return "leaf_slh"
    if all(f is SigFamily.ML_DSA_65 for f in p.families()):
        return "all_ml"
    return "root_slh_leaf_ml"


def compose_scenario_id(kex: KexMode, placement: Placement) -> str:
    """Canonical positional id: ``<group>__<f>_root[__<f>_int]__<f>_leaf``."""
    parts = [kex.tls_group_label, f"{placement.root.token}_root"]
    if placement.intermediate is not None:
        parts.append(f"{placement.intermediate.token}_int")
    parts.append(f"{placement.leaf.token}_leaf")
    return "__".join(parts)


_LEGACY_LEAF_TOKENS = {
    "leaf_mldsa65": SigFamily.ML_DSA_65,
    "leaf_slhdsashake192s": SigFamily.SLH_DSA_SHAKE_192S,
}


def parse_scenario_id(scenario_id: str) -> tuple[KexMode, Placement]:
    """Inverse of :func:`compose_scenario_id`.

    Also accepts the legacy leaf-only aliases ``<group>__leaf_mldsa65`` /
    ``<group>__leaf_slhdsashake192s``, which denote uniform depth-2
    hierarchies (root and leaf share the family).
    """
    parts = scenario_id.split("__")
    if len(parts) < 2:
        raise ValueError(f"malformed scenario id {scenario_id!r}")
    kex = KexMode.from_label(parts[0])
    tokens = parts[1:]

    if len(tokens) == 1 and tokens[0] in _LEGACY_LEAF_TOKENS:
        fam = _LEGACY_LEAF_TOKENS[tokens[0]]
        return kex, Placement(root=fam, intermediate=None, leaf=fam)

    def _pos(token: str, suffix: str) -> SigFamily:
        fam_token, _, pos = token.partition("_")
        if pos != suffix:
            raise ValueError(f"malformed scenario id {scenario_id!r}: expected *_{suffix}")
        return SigFamily.from_token(fam_token)

    if len(tokens) == 2:
        return kex, Placement(_pos(tokens[0], "root"), None, _pos(tokens[1], "leaf"))
    if len(tokens) == 3:
        return kex, Placement(
            _pos(tokens[0], "root"), _pos(tokens[1], "int"), _pos(tokens[2], "leaf")
        )
    raise ValueError(f"malformed scenario id {scenario_id!r}")


def legacy_alias(kex: KexMode, placement: Placement) -> Optional[str]:
    """Leaf-only alias for uniform depth-2 hierarchies, else None."""
    if placement.intermediate is not None or placement.root is not placement.leaf:
        return None
    suffix = (
        "leaf_mldsa65" if placement.leaf is SigFamily.ML_DSA_65 else "leaf_slhdsashake192s"
    )
    return f"{kex.tls_group_label}__{suffix}"


RUNS_FAST = 10000
RUNS_HEAVY = 300
DEFAULT_WARMUP = 20


def default_runs(placement: Placement) -> int:
    """Sampling policy: the leaf family decides the run count."""
    return RUNS_HEAVY if placement.leaf is SigFamily.SLH_DSA_SHAKE_192S else RUNS_FAST


@dataclass(frozen=True)
class Scenario:
    """One point of the experiment matrix."""

    scenario_id: str  # canonical positional id, recomputable from kex+placement
    kex: KexMode
    placement: Placement
    campaign: str
    runs: int
    warmup_runs: int = DEFAULT_WARMUP
    alias: Optional[str] = field(default=None)

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be positive")
        if self.warmup_runs < 0:
            raise ValueError("warmup_runs must be nonnegative")
        if self.scenario_id != compose_scenario_id(self.kex, self.placement):
            raise ValueError("scenario_id does not match kex+placement")

    @property
    def depth(self) -> int:
        return self.placement.depth

    @property
    def display_id(self) -> str:
        """Id used in external files and reports (legacy alias where one exists
        in the published inventory, canonical id otherwise)."""
        return self.alias or self.scenario_id

    @property
    def placement_class(self) -> PlacementClass:
        return classify_placement(self.placement)


def _scenario(kex: KexMode, spec: str, campaign: str, use_alias: bool = False) -> Scenario:
    _, placement = parse_scenario_id(f"{kex.tls_group_label}__{spec}")
    return Scenario(
        scenario_id=compose_scenario_id(kex, placement),
        kex=kex,
        placement=placement,
        campaign=campaign,
        runs=default_runs(placement),
        alias=legacy_alias(kex, placement) if use_alias else None,
    )


def enumerate_matrix() -> list[Scenario]:
    """The 17-scenario experimental inventory, ordered by (campaign, id).

    Campaign A carries the legacy ``leaf_<alg>`` aliases of its uniform
    depth-2 hierarchies; the other campaigns use positional ids directly.
    """
    C, H, P = KexMode.CLASSICAL, KexMode.HYBRID, KexMode.PURE_PQC
    rows = [
        _scenario(C, "ml_root__ml_leaf", "A", use_alias=True),
        _scenario(C, "slh_root__slh_leaf", "A", use_alias=True),
        _scenario(H, "ml_root__ml_leaf", "A", use_alias=True),
        _scenario(H, "slh_root__slh_leaf", "A", use_alias=True),
        _scenario(H, "ml_root__ml_int__ml_leaf", "B"),
        _scenario(H, "ml_root__ml_int__slh_leaf", "B"),
        _scenario(H, "ml_root__slh_int__slh_leaf", "B"),
        _scenario(H, "slh_root__ml_int__ml_leaf", "B"),
        _scenario(H, "slh_root__ml_int__slh_leaf", "B"),
        _scenario(H, "slh_root__slh_int__slh_leaf", "B"),
        _scenario(H, "ml_root__ml_leaf", "C"),
        _scenario(H, "ml_root__slh_leaf", "C"),
        _scenario(H, "slh_root__ml_leaf", "C"),
        _scenario(H, "slh_root__slh_leaf", "C"),
        _scenario(P, "ml_root__ml_leaf", "D"),
        _scenario(P, "slh_root__ml_int__ml_leaf", "D"),
        _scenario(P, "slh_root__slh_leaf", "D"),
    ]
    return sorted(rows, key=lambda s: (s.campaign, s.display_id))


def find_scenario(scenarios: list[Scenario], scenario_id: str) -> Scenario:
    """Look up by display id first (unique), then canonical id or alias.

    Several inventory entries re-measure one hierarchy configuration under
    different names (a deliberate reuse), so canonical ids may repeat; the
    display id is the unique key.
    """
    for s in scenarios:
        if scenario_id == s.display_id:
            return s
    for s in scenarios:
        if scenario_id == s.scenario_id:
            return s
    try:
        kex, placement = parse_scenario_id(scenario_id)
    except ValueError:
        raise KeyError(scenario_id) from None
    canonical = compose_scenario_id(kex, placement)
    for s in scenarios:
        if s.scenario_id == canonical:
            return s
    raise KeyError(scenario_id)


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "scenario_id": s.display_id,
        "canonical_id": s.scenario_id,
        "kex_mode": s.kex.name.lower(),
        "tls_group": s.kex.tls_group_label,
        "depth": s.depth,
        "root_family": s.placement.root.value,
        "intermediate_family": s.placement.intermediate.value if s.placement.intermediate else None,
        "leaf_family": s.placement.leaf.value,
        "campaign": s.campaign,
        "runs": s.runs,
        "warmup_runs": s.warmup_runs,
    }


def scenario_from_dict(d: dict) -> Scenario:
    kex = KexMode.from_label(d["tls_group"])
    _, placement = parse_scenario_id(d["canonical_id"])
    alias = d["scenario_id"] if d["scenario_id"] != d["canonical_id"] else None
    return Scenario(
        scenario_id=d["canonical_id"],
        kex=kex,
        placement=placement,
        campaign=d["campaign"],
        runs=d["runs"],
        warmup_runs=d["warmup_runs"],
        alias=alias,
    )


def write_scenarios(scenarios: list[Scenario], path: Path | str) -> None:
    payload = [scenario_to_dict(s) for s in scenarios]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def read_scenarios(path: Path | str) -> list[Scenario]:
    return [scenario_from_dict(d) for d in json.loads(Path(path).read_text())]
