"""Randomized property suites; every suite runs at least 1000 cases with a
fixed seed and must show zero violations."""

import properties_impl as impl


def test_position_partition():
    cases, violations = impl.partition_suite()
    assert cases >= 1000
    assert violations == 0


def test_pattern_monotonicity():
    cases, violations = impl.monotonicity_suite()
    assert cases >= 1000
    assert violations == 0


def test_empty_pattern_collapse():
    cases, violations = impl.collapse_suite()
    assert cases >= 1000
    assert violations == 0


def test_extraction_lemma():
    cases, violations, checked = impl.extraction_suite()
    assert cases >= 1000
    assert checked >= 200  # enough non-vacuous extractions
    assert violations == 0


def test_stable_pattern_persistence():
    cases, violations, checked = impl.stable_persistence_suite()
    assert cases >= 1000
    assert checked >= 200
    assert violations == 0


def test_orthogonal_context_persistence():
    cases, violations, checked = impl.orth_persistence_suite()
    assert cases >= 1000
    assert checked >= 100
    assert violations == 0


def test_match_unify_soundness():
    cases, violations = impl.match_unify_suite()
    assert cases >= 1000
    assert violations == 0


def test_graph_over_approximation_and_scp_safety():
    cases, graph_violations, scp_violations, oracle_rejects, found = impl.graph_chain_suite()
    assert cases >= 1000
    assert found >= 100  # the oracle actually finds chains
    assert oracle_rejects == 0  # oracle chains replay as proper chains
    assert graph_violations == 0
    assert scp_violations == 0


def test_orientation_numeric_soundness():
    checks, violations, accepted = impl.orientation_suite()
    assert checks >= 1000
    assert accepted >= 2
    assert violations == 0
