import random

import pytest

from injres.errors import ConfigError
from injres.modules import StdInjective, unit_action_method
from injres.verifier import (
    SCENARIOS,
    Check,
    Outcome,
    Report,
    Scenario,
    Skip,
    Status,
    _method_ranges,
    _run_check,
    finite_length,
    injective_support,
    product_ass_right,
    run_scenario,
    small_versus_big_support,
)


@pytest.fixture
def rng():
    return random.Random(0)


def check(status: Status) -> Check:
    return Check('c', 'claim', status, None, 0)


# ------------------------------ Scenarios ------------------------------ #


@pytest.mark.parametrize(
    'kwargs',
    [
        {'name': 'prop-nothing'},
        {'name': 'prop-main', 'prime': 4},
        {'name': 'prop-main', 'prime': 1},
        {'name': 'prop-main', 'window': (2, 1)},
        {'name': 'prop-main', 'torsion_bound': 0},
        {'name': 'prop-main', 'samples': -1},
    ],
)
def test_invalid_scenarios(kwargs):
    with pytest.raises(ConfigError):
        Scenario(**kwargs)


def test_every_scenario_is_constructible():
    for name in SCENARIOS:
        assert Scenario(name, prime=3).prime == 3


def test_check_names_are_unique_per_scenario():
    for checks in SCENARIOS.values():
        names = [name for name, _, _ in checks]
        assert len(names) == len(set(names))


# ------------------------------- Reports ------------------------------- #


def test_overall_ignores_skipped_checks():
    s = Scenario('prop-main')
    assert Report(s, (check(Status.PASS), check(Status.SKIPPED))).overall is Status.PASS
    assert Report(s, (check(Status.PASS), check(Status.FAIL))).overall is Status.FAIL
    assert Report(s, ()).overall is Status.PASS


def test_exceptions_become_failures():
    def explode(s, rng):
        raise ValueError('boom')

    result = _run_check(Scenario('prop-main'), 'explode', 'claim', explode)
    assert result.status is Status.FAIL
    assert result.witness == 'ValueError: boom'
    assert result.claim == 'claim'
    assert result.elapsed_ms >= 0


def test_skips_and_outcomes():
    s = Scenario('prop-main')
    skipped = _run_check(s, 'skip', 'claim', lambda s, rng: Skip('nothing to do'))
    assert (skipped.status, skipped.witness) == (Status.SKIPPED, 'nothing to do')
    failed = _run_check(s, 'fail', 'claim', lambda s, rng: Outcome(False, 'why'))
    assert (failed.status, failed.witness) == (Status.FAIL, 'why')


def test_checks_get_independent_generators():
    s = Scenario('prop-main', seed=5)
    draws = {}

    def draw(s, rng):
        return Outcome(True, str(rng.random()))

    for name in ('a', 'b', 'a'):
        draws.setdefault(name, set()).add(_run_check(s, name, 'claim', draw).witness)
    assert len(draws['a']) == 1
    assert draws['a'] != draws['b']


def test_zero_samples_skip_the_sampling_checks():
    s = Scenario('prop-main', window=(0, 1), samples=0)
    checks = {c.name: c for c in run_scenario(s).checks if c.status is Status.SKIPPED}
    assert set(checks) == {'differential-squares-to-zero', 'acyclicity-certificates'}


# --------------------------- Individual checks --------------------------- #


@pytest.mark.parametrize('p', [2, 3, 5])
def test_finite_length(p, rng):
    outcome = finite_length(Scenario('remark-ihulls', prime=p), rng)
    assert outcome.passed
    assert 'length 2' in outcome.witness


def test_small_versus_big_support(rng):
    outcome = small_versus_big_support(Scenario('prop-support'), rng)
    assert outcome.passed
    assert outcome.witness.startswith('supp E(R/(x)) = {(x)}')


def test_injective_support(rng):
    assert injective_support(Scenario('remark-ihulls'), rng).passed


def test_unit_action_witness_names_the_method():
    methods = {k: unit_action_method(StdInjective.emax(3), k) for k in range(1, 9)}
    assert _method_ranges(methods) == 'enumeration for k in 1..5, lattice for k in 6..8'
    methods = {k: unit_action_method(StdInjective.emax(2), k) for k in range(1, 9)}
    assert _method_ranges(methods) == 'enumeration for k in 1..8'


@pytest.mark.parametrize('p', [2, 3])
def test_product_ass_right(p, rng):
    outcome = product_ass_right(Scenario('remark-ass', prime=p), rng)
    assert outcome.passed


# ---------------------------- Whole scenarios ---------------------------- #


def test_remark_ass_passes_and_replays():
    s = Scenario('remark-ass', window=(0, 1), samples=5, seed=3)
    first, second = run_scenario(s), run_scenario(s)
    assert first.overall is Status.PASS
    assert [c.claim for c in first.checks] == ['product-ass-left', 'product-ass-right']
    assert [(c.status, c.witness) for c in first.checks] == [
        (c.status, c.witness) for c in second.checks
    ]
