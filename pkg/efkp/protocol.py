"""
Moves and running statistics of the simplified predictably unbounded forecasting game.
"""

from typing import NamedTuple

import numpy as np

from .exceptions import ProtocolViolation


class PathEvent(NamedTuple):
    """Forecaster's bound `c` and Reality's move `x` of one round."""
    c: float
    x: float

    def validate(self):
        """Raises :class:`ProtocolViolation` unless c >= 0 and |x| <= c."""
        if not (np.isfinite(self.c) and np.isfinite(self.x)):
            raise ProtocolViolation(f'non-finite move (c={self.c}, x={self.x})')
        if self.c < 0:
            raise ProtocolViolation(f'Forecaster announced negative bound c={self.c}')
        if abs(self.x) > self.c:
            raise ProtocolViolation(f'Reality left the announced range: |x|={abs(self.x)} > c={self.c}')


class GameState(NamedTuple):
    """
    State of the game after `n` rounds.

    Skeptic's capital is kept in log domain because long games over- and underflow linear floats.
    """
    n: int = 0
    S: float = 0.
    A2: float = 0.
    cbar: float = 0.
    log_capital: float = 0.

    @property
    def A(self) -> float:
        return float(np.sqrt(self.A2))

    @property
    def capital(self) -> float:
        return float(np.exp(self.log_capital))

    def advance(self, event: PathEvent, log_capital: float) -> 'GameState':
        return GameState(
            n=self.n + 1,
            S=self.S + event.x,
            A2=self.A2 + event.x ** 2,
            cbar=max(self.cbar, event.c),
            log_capital=log_capital,
        )


class RunningStats:
    """Mutable running sums S, A^2 and running maximum c-bar over the rounds an account has been active."""

    __slots__ = ('n', 'S', 'A2', 'cbar')

    def __init__(self):
        self.n = 0
        self.S = 0.
        self.A2 = 0.
        self.cbar = 0.

    def __repr__(self) -> str:
        return f'RunningStats(n={self.n}, S={self.S}, A2={self.A2}, cbar={self.cbar})'

    @property
    def A(self) -> float:
        return float(np.sqrt(self.A2))

    def update(self, c: float, x: float):
        self.n += 1
        self.S += x
        self.A2 += x * x
        if c > self.cbar:
            self.cbar = c
