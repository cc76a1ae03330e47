"""
Constant-proportion betting accounts, individually and as a vectorized weighted bank.
"""

from typing import List, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from ._CapitalProcess import CapitalProcess
from ..bounds import BoundRecord


class Account(CapitalProcess):
    r"""
    Constant-proportion account that bets :math:`M_n = \gamma K_{n-1}` until the first round with
    :math:`\gamma c_n > \delta`, so that :math:`K_n = \alpha \prod_{i \le n} (1 + \gamma x_i)` before freezing.

    The capital is tracked as :attr:`log_growth` = ln(K_n / alpha).
    """
    def __init__(self, gamma: float, alpha: float = 1., delta: float = 0.01):
        super().__init__(gamma, alpha, delta)
        self.log_growth = 0.

    def __repr__(self) -> str:
        return f'Account(gamma={self.gamma}, alpha={self.alpha}, frozen={self.frozen}, rounds={self.rounds})'

    @property
    def log_capital(self) -> float:
        return float(np.log(self.alpha) + self.log_growth)

    @property
    def excess(self) -> float:
        return float(self.alpha * np.expm1(self.log_growth))

    def fraction(self, c: float) -> float:
        self._check_freeze(c)
        return self.gamma if self.active else 0.

    def _bet(self) -> float:
        return self.gamma * self.value

    def _advance(self, x: float, c: float):
        self.log_growth += np.log1p(self.gamma * x)

    def bound_records(self, n: Optional[int] = None) -> List[BoundRecord]:
        return cp_bound_check(self, n)


def cp_bet(account: Account, c_next: float) -> float:
    """Bet of a constant-proportion account for the upcoming round; freezes the account if gamma * c_next > delta."""
    return account.bet(c_next)


def cp_bound_check(account: Account, n: Optional[int] = None) -> List[BoundRecord]:
    r"""
    Evaluates the log-sandwich

    .. math::
        \gamma S - \gamma^2 A^2 / 2 - \gamma^3 A^2 \bar c \le \ln(K_n / \alpha) \le \gamma S - \gamma^2 A^2 / 2
        + \gamma^3 A^2 \bar c,

    which holds as long as the account is open, since then :math:`|\gamma x_i| \le \gamma \bar c_n \le \delta`.

    Raises
    ------
    ValueError
        If the account is frozen or stopped.
    """
    if not account.active:
        raise ValueError(f'bound is only valid before the account freezes (frozen at round {account.freeze_round})')
    n = account.rounds if n is None else n
    g, s = account.gamma, account.stats
    center = g * s.S - g * g * s.A2 / 2
    remainder = g ** 3 * s.A2 * s.cbar
    return [
        BoundRecord(n, 'cp-bound', 'lower', center - remainder, account.log_growth, log_domain=True),
        BoundRecord(n, 'cp-bound', 'upper', account.log_growth, center + remainder, log_domain=True),
    ]


class AccountBank:
    r"""
    Weighted constant-proportion accounts that all start at round zero, evaluated jointly in log domain.

    Since account k freezes iff :math:`\gamma_k \bar c_n > \delta`, the frozen accounts always form a prefix of the
    accounts sorted by decreasing proportion. Their capitals are constant and are merged into a single log-sum once
    they freeze, so each round only touches the open accounts.

    Parameters
    ----------
    gamma : Sequence[float]
        Positive proportions.
    log_weights : Sequence[float]
        Logarithms of the initial capitals (weight times initial capital) of the accounts.
    delta : float
        Freezing threshold.
    log_cash : float, default = -inf
        Logarithm of the capital held as cash.
    """
    def __init__(self, gamma: Sequence[float], log_weights: Sequence[float], delta: float = 0.01,
                 log_cash: float = -np.inf):
        gamma = np.asarray(gamma, dtype=float)
        log_weights = np.asarray(log_weights, dtype=float)
        assert gamma.ndim == 1 and gamma.shape == log_weights.shape
        assert np.all(gamma > 0)
        assert 0 < delta < 1
        self._order = np.argsort(-gamma, kind='stable')
        self.gamma = gamma[self._order]
        self.log_weights = log_weights[self._order]
        self._log_gamma = np.log(self.gamma)
        self.delta = float(delta)
        self.log_cash = float(log_cash)
        self.log_growth = np.zeros_like(self.gamma)
        self.n_frozen = 0
        self.log_frozen = -np.inf
        self.cbar = 0.
        self.rounds = 0
        self._freeze_rounds = np.full(len(self.gamma), np.inf)

    def __len__(self) -> int:
        return len(self.gamma)

    @property
    def all_frozen(self) -> bool:
        return self.n_frozen == len(self.gamma)

    def _freeze(self, c: float):
        if c <= self.cbar:
            return
        self.cbar = c
        n_frozen = int(np.searchsorted(-self.gamma, -self.delta / c, side='left'))
        if n_frozen > self.n_frozen:
            newly = slice(self.n_frozen, n_frozen)
            self.log_frozen = float(np.logaddexp(
                self.log_frozen, logsumexp(self.log_weights[newly] + self.log_growth[newly])))
            self._freeze_rounds[newly] = self.rounds + 1
            self.n_frozen = n_frozen

    @property
    def log_open(self) -> float:
        if self.all_frozen:
            return -np.inf
        p = self.n_frozen
        return float(logsumexp(self.log_weights[p:] + self.log_growth[p:]))

    @property
    def log_capital(self) -> float:
        return float(logsumexp([self.log_open, self.log_frozen, self.log_cash]))

    def fraction(self, c: float) -> float:
        """Total bet of the open accounts for the upcoming round as a fraction of the total capital."""
        self._freeze(c)
        if self.all_frozen:
            return 0.
        p = self.n_frozen
        log_bet = logsumexp(self.log_weights[p:] + self.log_growth[p:] + self._log_gamma[p:])
        return float(np.exp(log_bet - self.log_capital))

    def step(self, x: float, c: float):
        self._freeze(c)
        self.rounds += 1
        p = self.n_frozen
        self.log_growth[p:] += np.log1p(self.gamma[p:] * x)

    def _unsort(self, values: np.ndarray) -> np.ndarray:
        out = np.empty_like(values)
        out[self._order] = values
        return out

    @property
    def freeze_rounds(self) -> np.ndarray:
        """First round without bet for every account in input order (inf for open accounts)."""
        return self._unsort(self._freeze_rounds)

    @property
    def account_log_capitals(self) -> np.ndarray:
        """Logarithms of the weighted capitals of the accounts in input order."""
        return self._unsort(self.log_weights + self.log_growth)
