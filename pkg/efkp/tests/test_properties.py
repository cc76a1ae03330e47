"""
Property-based tests of the invariants of the game: legal moves never bankrupt a strategy that freezes at its
threshold, the ledger reproduces the capital and the accounts keep their sandwich and bet identities.
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from efkp.accounts.ConstantProportion import Account, cp_bound_check
from efkp.accounts.UniformMixture import UniformMixtureAccount
from efkp.exceptions import ProtocolViolation
from efkp.ForecastingGame import run_game
from efkp.protocol import PathEvent
from efkp.skeptics.Basic import ConstantProportionSkeptic
from efkp.stopping_times import freeze_round


@st.composite
def legal_paths(draw, max_c: float = 0.01, min_size: int = 1, max_size: int = 60):
    cs = draw(st.lists(st.floats(0., max_c, allow_nan=False), min_size=min_size, max_size=max_size))
    ratios = draw(st.lists(st.floats(-1., 1., allow_nan=False), min_size=len(cs), max_size=len(cs)))
    return [(c, r * c) for c, r in zip(cs, ratios)]


@given(path=legal_paths(max_c=1.), gamma=st.floats(0., 5., allow_nan=False))
@settings(max_examples=50, suppress_health_check=[HealthCheck.too_slow])
def test_legal_paths_keep_capital_positive(path, gamma):
    trajectory = run_game(ConstantProportionSkeptic(gamma, delta=0.5), path, len(path))
    assert trajectory.final.capital > 0
    assert np.isclose(trajectory.replay_capital(), trajectory.final.capital, rtol=1e-9)


@given(path=legal_paths(), gamma=st.floats(0.01, 1., allow_nan=False))
@settings(max_examples=50)
def test_constant_proportion_sandwich(path, gamma):
    account = Account(gamma, delta=0.01)
    for c, x in path:
        account.step(x, c)
    if account.active:
        assert all(not record.violated for record in cp_bound_check(account))


@given(path=legal_paths(max_size=30), gamma=st.floats(0.05, 1., allow_nan=False))
@settings(max_examples=30, suppress_health_check=[HealthCheck.too_slow])
def test_uniform_mixture_bet_identity(path, gamma):
    q = UniformMixtureAccount(gamma, delta=0.01)
    value = q.value
    for c, x in path:
        bet = q.bet(c)
        q.step(x, c)
        assert np.isclose(q.value, value + bet * x, rtol=1e-12, atol=1e-15)
        value = q.value


@given(c=st.floats(0., 1e6, allow_nan=False), excess=st.floats(1e-6, 1e6, allow_nan=False))
def test_moves_beyond_the_bound_are_rejected(c, excess):
    with pytest.raises(ProtocolViolation):
        PathEvent(c, c * (1 + excess) + excess).validate()
    PathEvent(c, -c).validate()


@given(cs=st.lists(st.floats(0., 1., allow_nan=False), min_size=1, max_size=50),
       gammas=st.lists(st.floats(1e-4, 10., allow_nan=False), min_size=2, max_size=2))
def test_freeze_round_is_monotone(cs, gammas):
    small, large = sorted(gammas)
    rounds = [freeze_round(cs, gamma, 0.01) for gamma in (small, large)]
    as_float = [np.inf if r is None else r for r in rounds]
    assert as_float[1] <= as_float[0]
