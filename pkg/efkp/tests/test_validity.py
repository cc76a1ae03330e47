"""
Test the validity mixture: reduction to a single account, freezing, truncation, the martingale property on all
coin-tossing paths of a short horizon and the certificate at hitting rounds.
"""

import logging
from itertools import product

import numpy as np
import pytest

from efkp.bounds import EXPECTED_ASYMPTOTIC, BoundParams, verify_all_bounds
from efkp.exceptions import BlockingError
from efkp.ForecastingGame import ForecastingGame, run_game
from efkp.protocol import GameState
from efkp.reality.PathClasses import AdversarialUpperCrossing
from efkp.reality.Stochastic import UniformBounded
from efkp.skeptics.Basic import ConstantProportionSkeptic
from efkp.skeptics.Validity import CERTIFICATE_BOUNDS, ValidityMixture, certificate_window, is_hitting_round, \
    validity_bet, validity_certificate
from efkp.utils.class_functions import ClassFunction, MixtureWeights, build_blocking_weights

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s: %(message)s')

PARAMS = BoundParams(alpha=1.)


@pytest.fixture(name='weights')
def fixture_weights() -> MixtureWeights:
    return build_blocking_weights(ClassFunction.upper(), 300)


def test_single_account_reduction():
    psi = ClassFunction.upper()
    weights = MixtureWeights(a=np.ones(1), terms=np.ones(1), p=np.ones(1), Z=1., tail=0.)
    mixture = ValidityMixture(psi, params=PARAMS, weights=weights)
    assert mixture.cash == 0.
    gamma = psi(1.)
    path = list(zip(*[np.full(200, 0.001), np.tile([0.001, -0.0005], 100)]))
    expected = run_game(ConstantProportionSkeptic(gamma, delta=PARAMS.delta), path, 200).final.capital
    assert np.isclose(run_game(mixture, path, 200).final.capital, expected, rtol=1e-12)


def test_gamma_and_weights(weights: MixtureWeights):
    mixture = ValidityMixture('upper', params=PARAMS, weights=weights)
    ks = np.arange(1, 301)
    assert np.allclose(mixture.gamma, ClassFunction.upper()(ks) / np.sqrt(ks))
    assert np.isclose(mixture.capital, 1.)
    assert np.isclose(mixture.cash, weights.cash)


def test_all_frozen_bets_nothing(weights: MixtureWeights):
    mixture = ValidityMixture('upper', params=PARAMS, weights=weights)
    game = ForecastingGame(mixture)
    game.play_round((1e6, 0.))
    assert mixture.bank.all_frozen
    assert validity_bet(mixture, game.state, 1.) == 0.
    capital = mixture.capital
    game.play_round((1., 1.))
    assert mixture.capital == capital


def test_truncation_is_monotone():
    psi = ClassFunction.upper()
    source = UniformBounded(0., 0.01, seed=12)
    path = [next(source) for _ in range(300)]
    small = ValidityMixture(psi, k_max=100, params=PARAMS, k_norm=400)
    large = ValidityMixture(psi, k_max=200, params=PARAMS, k_norm=400)
    run_game(small, path, 300, record_ledger=False)
    run_game(large, path, 300, record_ledger=False)
    # refining the truncation leaves the materialized accounts unchanged
    assert np.allclose(small.bank.account_log_capitals, large.bank.account_log_capitals[:100], rtol=0, atol=1e-14)
    # and only moves capital between the cash and the added accounts
    added = np.exp(large.bank.account_log_capitals[100:])
    assert np.isclose(large.capital - small.capital, np.sum(added) - (small.cash - large.cash), atol=1e-12)


def test_unit_mean_on_all_paths():
    N, c = 8, 0.01
    weights = build_blocking_weights(ClassFunction.upper(), 200)
    capitals = []
    for signs in product((-1., 1.), repeat=N):
        skeptic = ValidityMixture('upper', params=PARAMS, weights=weights)
        trajectory = run_game(skeptic, [(c, s * c) for s in signs], N, record_ledger=False)
        capitals.append(trajectory.final.capital)
    assert np.all(np.array(capitals) > 0)
    assert np.isclose(np.mean(capitals), 1., rtol=0, atol=1e-12)


def test_user_function_is_clipped():
    mixture = ValidityMixture(ClassFunction.constant(100.), k_max=50, params=PARAMS)
    assert mixture.psi.kind == 'clipped-user'


def test_lower_function_has_no_weights():
    with pytest.raises(BlockingError):
        ValidityMixture('lower', k_max=50, params=PARAMS)


def test_certificate_not_applicable(weights: MixtureWeights):
    mixture = ValidityMixture('upper', params=PARAMS, weights=weights)
    report = validity_certificate(mixture, GameState(n=5, S=0., A2=4., cbar=1.))
    records = list(report)
    assert len(records) == 1
    assert not records[0].applicable and records[0].bound_id == 'validity-certificate'
    assert list(mixture.bound_records(GameState(n=5, S=0., A2=4., cbar=1.))) == []

    # a hitting round whose window exceeds the materialized accounts
    state = GameState(n=5, S=1e4, A2=1e6, cbar=1.)
    assert is_hitting_round(state, mixture.psi)
    record = list(validity_certificate(mixture, state))[0]
    assert record.case_id == 'window-not-materialized'


def test_certificate_window():
    psi = ClassFunction.constant(2.)
    assert certificate_window(GameState(S=10., A2=100.), psi) == (50, 100)


def test_certificate_on_crossing_path():
    # with c = 0.1 = delta throughout, every window starting at k >= 3 keeps its accounts open
    params = BoundParams(delta=0.1, C=1., alpha=1.)
    mixture = ValidityMixture('upper', k_max=100, params=params, k_min=3)
    source = AdversarialUpperCrossing(C=1., cap=0.1, psi='upper')
    trajectory = run_game(mixture, source, 5000, check_bounds=True, record_ledger=False)
    assert trajectory.final.cbar == pytest.approx(0.1)

    late = [r for r in trajectory.bounds if r.case_id != EXPECTED_ASYMPTOTIC]
    for bound_id in CERTIFICATE_BOUNDS:
        records = [r for r in late if r.bound_id == bound_id]
        assert len(records) > 4000, bound_id
        assert not [r for r in records if r.violated], bound_id
        assert all(r.k is None or r.k >= 3 for r in records)

    final = [r.lhs for r in trajectory.bounds.select('final')]
    # the lower bound is driven by the block multiplier of the window, which grows with A^2
    assert np.all(np.diff(final) >= -1e-12)

    checks = verify_all_bounds(trajectory)
    assert checks['non_strict_violations'] == 0
    # windows starting at k = 1, 2 contain frozen accounts
    assert checks['bounds']['keep-open']['expected_asymptotic'] > 0
    assert checks['bounds']['deltaconst']['expected_asymptotic'] > 0


def test_certificate_tags_small_windows(weights: MixtureWeights):
    mixture = ValidityMixture('upper', params=PARAMS, weights=weights, k_min=50)
    state = GameState(n=400, S=40., A2=40., cbar=0.1)
    assert is_hitting_round(state, mixture.psi)
    records = [r for r in validity_certificate(mixture, state) if r.applicable]
    assert {r.bound_id for r in records} == set(CERTIFICATE_BOUNDS)
    assert all(r.case_id == EXPECTED_ASYMPTOTIC for r in records)

    untagged = ValidityMixture('upper', params=PARAMS, weights=weights)
    assert not [r for r in validity_certificate(untagged, state) if r.case_id == EXPECTED_ASYMPTOTIC]
