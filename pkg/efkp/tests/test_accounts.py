"""
Test the betting accounts: the constant-proportion log-sandwich, freezing of the vectorized bank, the
Gauss-Legendre uniform mixture against exact integration and the bounds of the buy/sell process.
"""

import logging

import numpy as np
import pytest
from scipy.special import logsumexp

from efkp.accounts.BuySell import BuySellAccount, t_bounds, t_update, t_upper_bound
from efkp.accounts.ConstantProportion import Account, AccountBank, cp_bet, cp_bound_check
from efkp.accounts.UniformMixture import LOWER_NODE, UniformMixtureAccount, q_bet, q_update, q_upper_bounds
from efkp.bounds import ALPHA, BOUND_TOLERANCE, BoundReport
from efkp.protocol import PathEvent
from efkp.reality.Stochastic import UniformBounded

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s: %(message)s')


def small_path(n: int, c_max: float = 0.01, seed: int = 0):
    source = UniformBounded(0., c_max, seed=seed)
    return [next(source) for _ in range(n)]


def test_cp_sandwich_single_round():
    account = Account(0.005, delta=0.01)
    account.step(1., 1.)
    lower, upper = cp_bound_check(account)
    assert np.isclose(lower.lhs, 0.004987375, rtol=1e-12)
    assert np.isclose(upper.rhs, 0.004987625, rtol=1e-12)
    assert np.isclose(account.log_growth, np.log1p(0.005))
    assert not lower.violated and not upper.violated


def test_cp_sandwich_zero_proportion():
    account = Account(0., delta=0.01)
    for c, x in small_path(20):
        account.step(x, c)
    for record in cp_bound_check(account):
        assert record.lhs == record.rhs == 0.


@pytest.mark.parametrize('gamma', [0.1, 0.5, 1.])
def test_cp_sandwich_random_path(gamma: float):
    account = Account(gamma, delta=0.01)
    report = BoundReport()
    for n, (c, x) in enumerate(small_path(300), start=1):
        account.step(x, c)
        report.extend(cp_bound_check(account, n))
    assert account.active
    assert report.ok


def test_cp_sandwich_corpus():
    # 100 paths of 10^4 rounds with ten proportions each, all open since gamma * cbar <= delta
    rng = np.random.default_rng(31)
    delta, n_rounds = 0.01, 10 ** 4
    for _ in range(100):
        c = rng.uniform(0., rng.uniform(1e-3, 0.05), n_rounds)
        x = c * rng.uniform(-1., 1., n_rounds)
        gamma = delta / c.max() * rng.uniform(0.01, 1., 10)
        bank = AccountBank(gamma, np.zeros(10), delta=delta)
        for c_n, x_n in zip(c, x):
            bank.step(x_n, c_n)
        assert bank.n_frozen == 0

        g = gamma[:, None]
        S, A2, cbar = np.cumsum(x), np.cumsum(x ** 2), np.maximum.accumulate(c)
        log_growth = np.cumsum(np.log1p(g * x), axis=1)
        assert np.allclose(bank.account_log_capitals, log_growth[:, -1], rtol=1e-10, atol=1e-12)
        center = g * S - g ** 2 * A2 / 2
        remainder = g ** 3 * A2 * cbar
        assert np.all(center - remainder <= log_growth + BOUND_TOLERANCE)
        assert np.all(log_growth <= center + remainder + BOUND_TOLERANCE)


def test_cp_freeze():
    account = Account(0.1, delta=0.01)
    account.step(0.05, 0.05)
    assert account.fraction(0.05) == 0.1
    assert account.fraction(0.2) == 0.
    assert account.frozen and account.freeze_round == 2
    growth = account.log_growth
    account.step(0.2, 0.2)
    assert account.log_growth == growth
    with pytest.raises(ValueError):
        cp_bound_check(account)


def test_bank_matches_accounts():
    gamma = np.array([0.3, 2., 0.9, 1.2, 0.05])
    weights = np.array([0.1, 0.2, 0.3, 0.15, 0.05])
    bank = AccountBank(gamma, np.log(weights), delta=0.01, log_cash=np.log(0.2))
    accounts = [Account(g, delta=0.01) for g in gamma]
    for c, x in small_path(200, c_max=0.012, seed=4):
        bank.fraction(c)
        bank.step(x, c)
        for account in accounts:
            account.step(x, c)
    expected = logsumexp(np.append(np.log(weights) + [a.log_growth for a in accounts], np.log(0.2)))
    assert np.isclose(bank.log_capital, expected, rtol=1e-12)
    assert np.allclose(bank.account_log_capitals, np.log(weights) + [a.log_growth for a in accounts])
    freeze_rounds = [np.inf if a.freeze_round is None else a.freeze_round for a in accounts]
    assert np.array_equal(bank.freeze_rounds, freeze_rounds)


def test_bank_all_frozen():
    bank = AccountBank([0.5, 1.], np.log([0.5, 0.5]), delta=0.01)
    bank.step(0.005, 0.005)
    log_capital = bank.log_capital
    assert bank.fraction(1.) == 0.
    assert bank.all_frozen
    bank.step(1., 1.)
    assert np.isclose(bank.log_capital, log_capital, rtol=1e-14)


def test_uniform_mixture_first_round():
    q = UniformMixtureAccount(0.1, delta=0.5)
    assert np.isclose(q.value, ALPHA)
    q.step(1., 1.)
    # integral of 1 + 0.1 u over [2/e, 1]
    assert np.isclose(q.value, 0.2871740, atol=1e-7)
    assert np.isclose(q.value, ALPHA + 0.05 * (1 - LOWER_NODE ** 2), rtol=1e-13)


def test_uniform_mixture_exact_integration():
    q = UniformMixtureAccount(0.8, n_nodes=64, delta=0.01, exact=True)
    value = q.value
    for c, x in small_path(60, seed=5):
        bet = q.bet(c)
        assert np.isclose(bet, q.exact_bet(), rtol=1e-10)
        q.step(x, c)
        # capital process identity Q_n = Q_{n-1} + M_n x_n
        assert np.isclose(q.value, value + bet * x, rtol=1e-12)
        value = q.value
    assert np.isclose(q.value, q.exact_value(), rtol=1e-10)


def test_uniform_mixture_exact_corpus():
    rng = np.random.default_rng(37)
    for _ in range(100):
        q = UniformMixtureAccount(rng.uniform(0.05, 1.), n_nodes=64, delta=0.01, exact=True)
        c = rng.uniform(0., 0.01, 64)
        x = c * rng.uniform(-1., 1., 64)
        value = q.value
        for c_n, x_n in zip(c, x):
            bet = q.bet(c_n)
            assert np.isclose(bet, q.exact_bet(), rtol=1e-10, atol=0.)
            q.step(x_n, c_n)
            assert np.isclose(q.value, q.exact_value(), rtol=1e-10, atol=0.)
            assert np.isclose(q.value, value + bet * x_n, rtol=1e-12, atol=0.)
            value = q.value
        assert q.active and q.rounds == 64


def test_uniform_mixture_bounds():
    q = UniformMixtureAccount(0.8, delta=0.01)
    report = BoundReport(q_upper_bounds(q))
    for c, x in small_path(500, seed=6):
        q.step(x, c)
        report.extend(q_upper_bounds(q))
    assert len(report.select('q-upper')) > 0
    assert report.ok


def test_uniform_mixture_boundary_path():
    # 201 moves up and 199 moves down of size c place S = gamma A^2 on the boundary of the cases
    gamma, c = 0.5, 0.01
    q = UniformMixtureAccount(gamma, delta=0.01)
    for x in [c] * 201 + [-c] * 199:
        q.step(x, c)
    assert np.isclose(q.stats.S, gamma * q.stats.A2)
    assert BoundReport(q_upper_bounds(q)).ok


def test_buy_sell_composite():
    gamma = 0.3
    t = BuySellAccount(gamma, delta=0.01)
    assert np.isclose(t.value, ALPHA)
    q = UniformMixtureAccount(gamma, delta=0.01)
    k = Account(gamma * np.e, alpha=ALPHA, delta=0.01)
    value = t.value
    for c, x in small_path(300, seed=7):
        bet = t.bet(c)
        t.step(x, c)
        q.step(x, c)
        k.step(x, c)
        assert np.isclose(t.value, value + bet * x, rtol=1e-12, atol=1e-15)
        value = t.value
    assert np.isclose(t.value, 2 * q.value - k.value, rtol=1e-12)


def test_buy_sell_freezes_with_sold_leg():
    t = BuySellAccount(1., delta=0.01)
    # e * gamma * c > delta although gamma * c <= delta
    assert t.bet(0.005) == 0.
    assert t.frozen and t.q.frozen and t.k_sold.frozen


def test_buy_sell_bounds():
    t = BuySellAccount(0.3, delta=0.01)
    report = BoundReport()
    for c, x in small_path(400, c_max=0.012, seed=8):
        t.step(x, c)
        report.extend(t_bounds(t))
    assert report.ok
    bound, strict = t_upper_bound(t)
    assert t.value <= bound * (1 + 1e-9)
    assert isinstance(strict, bool)


def test_stop_keeps_capital():
    t = BuySellAccount(0.3, delta=0.01)
    for c, x in small_path(50, seed=9):
        t.step(x, c)
    t.stop()
    value, n = t.value, t.stats.n
    for c, x in small_path(50, seed=10):
        assert t.bet(c) == 0.
        t.step(x, c)
    assert t.value == value
    assert t.stats.n == n
    assert t.stop_round == 50


def test_functional_updates():
    account, q, t = Account(0.5, delta=0.01), UniformMixtureAccount(0.5, delta=0.01), BuySellAccount(0.5, delta=0.01)
    reference = [Account(0.5, delta=0.01), UniformMixtureAccount(0.5, delta=0.01), BuySellAccount(0.5, delta=0.01)]
    for c, x in small_path(100, seed=11):
        assert cp_bet(account, c) == reference[0].bet(c)
        assert q_bet(q, c) == reference[1].bet(c)
        t.bet(c)
        reference[2].bet(c)
        account.step(x, c)
        assert q_update(q, PathEvent(c, x)) is q
        assert t_update(t, PathEvent(c, x)) is t
        for process in reference:
            process.step(x, c)
    assert account.log_growth == reference[0].log_growth
    assert q.value == reference[1].value
    assert t.value == reference[2].value
