from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pqchainlab.scenario import (
    DEFAULT_WARMUP,
    KexMode,
    Placement,
    SigFamily,
    classify_placement,
    compose_scenario_id,
    conceptual_perf_group,
    default_runs,
    enumerate_matrix,
    find_scenario,
    legacy_alias,
    parse_scenario_id,
    read_scenarios,
    write_scenarios,
)

ML = SigFamily.ML_DSA_65
SLH = SigFamily.SLH_DSA_SHAKE_192S


def test_compose_positional_ids():
    assert (
        compose_scenario_id(KexMode.HYBRID, Placement(SLH, ML, ML))
        == "x25519mlkem768__slh_root__ml_int__ml_leaf"
    )
    assert compose_scenario_id(KexMode.PURE_PQC, Placement(ML, None, ML)) == "mlkem768__ml_root__ml_leaf"


def test_parse_legacy_alias():
    kex, placement = parse_scenario_id("x25519__leaf_mldsa65")
    assert kex is KexMode.CLASSICAL
    assert placement == Placement(ML, None, ML)
    kex, placement = parse_scenario_id("x25519mlkem768__leaf_slhdsashake192s")
    assert placement == Placement(SLH, None, SLH)


def test_compose_never_generates_alias():
    assert compose_scenario_id(KexMode.CLASSICAL, Placement(ML, None, ML)) == "x25519__ml_root__ml_leaf"
    assert legacy_alias(KexMode.CLASSICAL, Placement(ML, None, ML)) == "x25519__leaf_mldsa65"
    assert legacy_alias(KexMode.CLASSICAL, Placement(SLH, None, ML)) is None


@pytest.mark.parametrize("bad", ["nonsense", "x25519", "x25519__ml_root", "foo__ml_root__ml_leaf"])
def test_parse_rejects_malformed(bad):
    with pytest.raises(ValueError):
        parse_scenario_id(bad)


@given(
    kex=st.sampled_from(list(KexMode)),
    root=st.sampled_from([ML, SLH]),
    intermediate=st.sampled_from([None, ML, SLH]),
    leaf=st.sampled_from([ML, SLH]),
)
def test_compose_parse_roundtrip(kex, root, intermediate, leaf):
    placement = Placement(root, intermediate, leaf)
    parsed_kex, parsed = parse_scenario_id(compose_scenario_id(kex, placement))
    assert parsed_kex is kex and parsed == placement


def test_matrix_inventory(matrix):
    assert len(matrix) == 17
    assert len({s.display_id for s in matrix}) == 17
    # campaigns A and C deliberately re-measure two hybrid depth-2 shapes,
    # so canonical ids repeat while inventory ids stay unique
    assert len({s.scenario_id for s in matrix}) == 15
    assert Counter(s.campaign for s in matrix) == {"A": 4, "B": 6, "C": 4, "D": 3}
    assert [s.campaign for s in matrix] == sorted(s.campaign for s in matrix)


def test_matrix_run_policy(matrix):
    assert find_scenario(matrix, "x25519__leaf_slhdsashake192s").runs == 300
    assert find_scenario(matrix, "x25519__leaf_mldsa65").runs == 10000
    for s in matrix:
        expected = 300 if s.placement.leaf is SLH else 10000
        assert s.runs == expected == default_runs(s.placement)
        assert s.warmup_runs == DEFAULT_WARMUP


def test_matrix_id_shapes(matrix):
    for s in matrix:
        if s.depth == 2:
            assert "_int__" not in s.scenario_id
        else:
            assert "_int__" in s.scenario_id


def test_find_scenario_accepts_either_spelling(matrix):
    legacy = find_scenario(matrix, "x25519mlkem768__leaf_mldsa65")
    canonical = find_scenario(matrix, "x25519mlkem768__ml_root__ml_leaf")
    assert legacy.campaign == "A"
    assert canonical.campaign == "C"
    assert legacy.scenario_id == canonical.scenario_id  # same hierarchy shape
    # classical alias resolves through its canonical spelling
    assert find_scenario(matrix, "x25519__ml_root__ml_leaf").display_id == "x25519__leaf_mldsa65"
    with pytest.raises(KeyError):
        find_scenario(matrix, "x25519__slh_root__ml_int__ml_leaf")


def test_classification_flags():
    assert classify_placement(Placement(ML, ML, ML)).flags() == {"all_ml"}
    assert classify_placement(Placement(SLH, ML, ML)).flags() == {"root_slh_leaf_not_slh"}
    assert classify_placement(Placement(ML, SLH, SLH)).flags() == {
        "intermediate_slh_any",
        "leaf_slh",
    }
    assert classify_placement(Placement(SLH, None, SLH)).flags() == {"leaf_slh"}


def test_class_sizes_over_matrix(matrix):
    counts = Counter(flag for s in matrix for flag in s.placement_class.flags())
    assert counts == {
        "all_ml": 5,
        "root_slh_leaf_not_slh": 3,
        "intermediate_slh_any": 2,
        "leaf_slh": 9,
    }


def test_conceptual_groups(matrix):
    groups = Counter(conceptual_perf_group(s.placement) for s in matrix)
    assert groups == {"all_ml": 5, "root_slh_leaf_ml": 3, "leaf_slh": 9}


def test_scenarios_json_roundtrip(tmp_path, matrix):
    path = tmp_path / "scenarios.json"
    write_scenarios(matrix, path)
    first = path.read_bytes()
    loaded = read_scenarios(path)
    assert loaded == matrix
    write_scenarios(loaded, path)
    assert path.read_bytes() == first
