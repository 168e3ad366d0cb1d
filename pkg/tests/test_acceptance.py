"""Acceptance gate: one test per headline guarantee.

Each test reruns the corresponding verification suite from the command
line layer and asserts every check in it, so `pytest -v` prints one
pass/fail line per guarantee. Suites are shared through session fixtures
to keep the whole gate fast.
"""

import time

import pytest

from exactqfa import cli

CONTEXTUALITY_SEED = "acceptance"


def _run_suite(fn, *args):
    start = time.perf_counter()
    checks = fn(*args)
    elapsed = time.perf_counter() - start
    return {check.name: check for check in checks}, elapsed


@pytest.fixture(scope="session")
def awpal():
    return _run_suite(cli.suite_awpal)


@pytest.fixture(scope="session")
def twinpal():
    return _run_suite(cli.suite_twinpal)


@pytest.fixture(scope="session")
def lasvegas():
    return _run_suite(cli.suite_lasvegas)


@pytest.fixture(scope="session")
def eq():
    return _run_suite(cli.suite_eq)


@pytest.fixture(scope="session")
def evenodd():
    return _run_suite(cli.suite_evenodd)


@pytest.fixture(scope="session")
def witnesses():
    return _run_suite(cli.suite_witnesses)


@pytest.fixture(scope="session")
def contextuality():
    return _run_suite(cli.suite_contextuality, CONTEXTUALITY_SEED)


def _assert_check(checks, name):
    assert name in checks, f"suite did not report {name}"
    check = checks[name]
    assert check.passed, f"{name}: {check.detail}"


def test_criterion_01_palindrome_runs_are_exact_fixed_points(awpal):
    checks, elapsed = awpal
    _assert_check(checks, "awpal.palindromes_fixed_point")
    assert elapsed < 60, f"suite took {elapsed:.1f}s, budget is one minute"


def test_criterion_02_nonpalindrome_detection_meets_exponential_floor(awpal):
    checks, _ = awpal
    _assert_check(checks, "awpal.nonpalindromes_lower_bound")


def test_criterion_03_restarting_twin_comparison_is_one_sided(twinpal):
    checks, _ = twinpal
    _assert_check(checks, "twinpal.one_sided_and_per_round_bounds")


def test_criterion_04_las_vegas_runs_never_answer_wrongly(lasvegas):
    checks, _ = lasvegas
    _assert_check(checks, "lasvegas.size1")
    _assert_check(checks, "lasvegas.size2")


def test_criterion_05_rotation_separation_bound_is_certified(eq):
    checks, elapsed = eq
    _assert_check(checks, "eq.rotation_separation_bound")
    assert elapsed < 60, f"suite took {elapsed:.1f}s, budget is one minute"


def test_criterion_06_count_comparison_rounds_grow_quadratically(eq):
    checks, _ = eq
    _assert_check(checks, "eq.expected_rounds_quadratic")


def test_criterion_07_parity_machines_and_cycle_checker_agree(evenodd):
    checks, _ = evenodd
    _assert_check(checks, "evenodd.mcqfa_exact")
    _assert_check(checks, "evenodd.dfa_cycle_check")
    _assert_check(checks, "evenodd.short_cycle_counterexamples")


def test_criterion_08_magic_square_values_and_game_records(contextuality):
    checks, _ = contextuality
    _assert_check(checks, "contextuality.classical_chi_max")
    _assert_check(checks, "contextuality.quantum_chi")
    _assert_check(checks, "contextuality.quantum_game_perfect")
    _assert_check(checks, "contextuality.classical_game_max")


def test_criterion_09_memory_game_separates_qubit_from_finite_memory(contextuality):
    checks, _ = contextuality
    _assert_check(checks, "contextuality.memory_quantum_attains_q")
    _assert_check(checks, "contextuality.memory_classical_cutoff")


def test_criterion_10_dissimilarity_witnesses_and_expansion(witnesses):
    checks, _ = witnesses
    _assert_check(checks, "witnesses.promisepal")
    _assert_check(checks, "witnesses.promiseeq")
    _assert_check(checks, "witnesses.twin_expand_preserves_status")
