"""
A module that defines a common interface for all betting accounts.
"""

from abc import ABC, abstractmethod
from typing import List, Optional

import numpy as np

from ..bounds import BoundRecord
from ..protocol import RunningStats


class CapitalProcess(ABC):
    r"""
    The base class of all betting accounts, i.e. capital processes :math:`K_n = K_{n-1} + M_n x_n` started at
    :attr:`alpha`.

    An account freezes (bets zero from then on) at the first round whose announced bound satisfies
    ``freeze_factor * gamma * c > delta``, which keeps every factor :math:`1 + \gamma x` of its capital positive.
    An account can additionally be stopped from outside, e.g. at a stopping time of an enclosing strategy.
    The running statistics :attr:`stats` only cover the rounds in which the account was active.

    Parameters
    ----------
    gamma : float
        Betting proportion.
    alpha : float
        Initial capital.
    delta : float
        Freezing threshold.
    freeze_factor : float, default = 1
        Multiplier of gamma in the freezing condition.
    """
    def __init__(self, gamma: float, alpha: float, delta: float = 0.01, freeze_factor: float = 1.):
        assert gamma >= 0
        assert alpha > 0
        assert 0 < delta < 1
        self.gamma = float(gamma)
        self.alpha = float(alpha)
        self.delta = float(delta)
        self._freeze_factor = freeze_factor
        self.rounds = 0
        self.frozen = False
        self.freeze_round: Optional[int] = None
        self.stopped = False
        self.stop_round: Optional[int] = None
        self.stats = RunningStats()

    @property
    def active(self) -> bool:
        return not (self.frozen or self.stopped)

    @property
    @abstractmethod
    def excess(self) -> float:
        """Capital minus initial capital, computed without cancellation."""
        raise NotImplementedError

    @property
    def value(self) -> float:
        return self.alpha + self.excess

    @property
    def log_capital(self) -> float:
        value = self.value
        return float(np.log(value)) if value > 0 else -np.inf

    def exceeds(self, c: float) -> bool:
        return self._freeze_factor * self.gamma * c > self.delta

    def freeze(self, n: Optional[int] = None):
        """Freezes the account; `n` is the first round without bet (defaults to the upcoming round)."""
        if not self.frozen:
            self.frozen = True
            self.freeze_round = self.rounds + 1 if n is None else n

    def stop(self, n: Optional[int] = None):
        """Stops the account after round `n` (defaults to the last played round)."""
        if not self.stopped:
            self.stopped = True
            self.stop_round = self.rounds if n is None else n

    def _check_freeze(self, c: float):
        if self.active and self.exceeds(c):
            self.freeze()

    def bet(self, c: float) -> float:
        """Bet M_n for the upcoming round with announced bound `c`."""
        self._check_freeze(c)
        return self._bet() if self.active else 0.

    def fraction(self, c: float) -> float:
        """Bet of the upcoming round as a fraction of the current capital."""
        return self.bet(c) / self.value

    def step(self, x: float, c: float):
        """Plays one round with bound `c` and outcome `x`."""
        self._check_freeze(c)
        self.rounds += 1
        if self.active:
            self._advance(x, c)
            self.stats.update(c, x)

    @abstractmethod
    def _bet(self) -> float:
        raise NotImplementedError

    @abstractmethod
    def _advance(self, x: float, c: float):
        raise NotImplementedError

    @abstractmethod
    def bound_records(self, n: Optional[int] = None) -> List[BoundRecord]:
        """Evaluates the analytic bounds of the account for its current state."""
        raise NotImplementedError
