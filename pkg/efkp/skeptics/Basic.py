"""
Elementary strategies: a single betting account, weighted mixtures of strategies and scripted bets.
"""

import logging
from itertools import chain
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from ._Skeptic import Skeptic
from ..accounts._CapitalProcess import CapitalProcess
from ..accounts.ConstantProportion import Account
from ..bounds import BoundRecord
from ..protocol import GameState, PathEvent


class ProcessSkeptic(Skeptic):
    """Plays a single betting account, e.g. an :class:`~efkp.accounts.ConstantProportion.Account`."""

    def __init__(self, process: CapitalProcess, logger: logging.Logger = None, verbose: int = 0):
        super().__init__(process.alpha, logger, verbose)
        self.process = process

    @property
    def log_capital(self) -> float:
        return self.process.log_capital

    def fraction(self, state: GameState, c: float) -> float:
        return self.process.fraction(c)

    def observe(self, event: PathEvent, state: GameState):
        self.process.step(event.x, event.c)

    def bound_records(self, state: GameState) -> Iterable[BoundRecord]:
        return self.process.bound_records(state.n) if self.process.active else ()


class ConstantProportionSkeptic(ProcessSkeptic):
    """Bets the fixed fraction `gamma` of the current capital until gamma * c exceeds `delta`."""

    def __init__(self, gamma: float, alpha: float = 1., delta: float = 0.01, logger: logging.Logger = None,
                 verbose: int = 0):
        super().__init__(Account(gamma, alpha, delta), logger, verbose)


class MixtureSkeptic(Skeptic):
    r"""
    Weighted mixture :math:`\mathcal{K} = \sum_i w_i \mathcal{K}^{(i)} + (1 - \sum_i w_i) \alpha` of strategies
    with common initial capital :math:`\alpha`; the residual weight is held as cash.

    Since the protocol is linear in the bets, the mixture bets :math:`\sum_i w_i M^{(i)}_n` and its capital equals
    the weighted sum of the component capitals at every round.
    """
    def __init__(self, skeptics: Sequence[Skeptic], weights: Sequence[float], logger: logging.Logger = None,
                 verbose: int = 0):
        weights = np.asarray(weights, dtype=float)
        assert len(skeptics) == len(weights) > 0
        assert np.all(weights > 0)
        total = float(np.sum(weights))
        assert total <= 1. + 1e-12
        alpha = skeptics[0].alpha
        assert all(np.isclose(s.alpha, alpha) for s in skeptics)
        super().__init__(alpha, logger, verbose)
        self.skeptics = list(skeptics)
        self.weights = weights
        self._log_weights = np.log(weights)
        self.cash = max(1. - total, 0.) * alpha
        self._log_cash = float(np.log(self.cash)) if self.cash > 0 else -np.inf

    @property
    def component_log_capitals(self) -> np.ndarray:
        return np.array([s.log_capital for s in self.skeptics])

    @property
    def log_capital(self) -> float:
        return float(logsumexp(np.append(self._log_weights + self.component_log_capitals, self._log_cash)))

    def fraction(self, state: GameState, c: float) -> float:
        fractions = np.array([s.fraction(state, c) for s in self.skeptics])
        shares = np.exp(self._log_weights + self.component_log_capitals - self.log_capital)
        return float(np.sum(shares * fractions))

    def observe(self, event: PathEvent, state: GameState):
        for s in self.skeptics:
            s.observe(event, state)

    def bound_records(self, state: GameState) -> Iterable[BoundRecord]:
        return list(chain.from_iterable(s.bound_records(state) for s in self.skeptics))


class ScriptedSkeptic(Skeptic):
    """
    Bets the fraction returned by `script(state, c)`. No collateral check is made, which makes it useful for
    testing the referee.
    """
    def __init__(self, script: Callable[[GameState, float], float], alpha: float = 1.,
                 logger: logging.Logger = None, verbose: int = 0):
        super().__init__(alpha, logger, verbose)
        self._script = script
        self._log_capital = float(np.log(alpha))
        self._fraction: Optional[float] = None

    @property
    def log_capital(self) -> float:
        return self._log_capital

    def fraction(self, state: GameState, c: float) -> float:
        self._fraction = float(self._script(state, c))
        return self._fraction

    def observe(self, event: PathEvent, state: GameState):
        growth = self._fraction * event.x
        self._log_capital += float(np.log1p(growth)) if growth > -1 else -np.inf
