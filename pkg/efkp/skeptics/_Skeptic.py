"""
A module that defines the interface between the game engine and Skeptic's strategies.
"""

import logging
from abc import ABC, abstractmethod
from typing import Iterable

import numpy as np

from ..bounds import BoundRecord
from ..protocol import GameState, PathEvent


class Skeptic(ABC):
    r"""
    The base class for all of Skeptic's strategies.

    A strategy announces its bet as a fraction of its current capital, :math:`M_n = f_n \mathcal{K}_{n-1}`, given
    the state of the game before the round and Forecaster's bound :math:`c_n`. Reality's move :math:`x_n` is only
    revealed afterwards through :meth:`observe`, which makes every strategy predictable by construction. Capital is
    kept in log domain.

    Parameters
    ----------
    alpha : float
        Initial capital.
    logger : logging.Logger, default = None
        Logger instance used for intermediate output. If None, an internal logger instance will be created.
    verbose : {0, 1, 2, 3}, default = 0
        Verbosity level.

        * 0: Show only errors.
        * 1: Include warnings.
        * 2: Include info.
        * 3: Include debug messages.
    """
    def __init__(self, alpha: float = 1., logger: logging.Logger = None, verbose: int = 0):
        assert alpha > 0
        self.alpha = float(alpha)
        self._logger = logger if logger is not None else logging.getLogger(self.__class__.__name__)
        self._logger.setLevel([logging.ERROR, logging.WARNING, logging.INFO, logging.DEBUG][verbose])

    @property
    @abstractmethod
    def log_capital(self) -> float:
        raise NotImplementedError

    @property
    def capital(self) -> float:
        return float(np.exp(self.log_capital))

    @abstractmethod
    def fraction(self, state: GameState, c: float) -> float:
        """Bet of the upcoming round divided by the current capital."""
        raise NotImplementedError

    def bet(self, state: GameState, c: float) -> float:
        return self.fraction(state, c) * self.capital

    @abstractmethod
    def observe(self, event: PathEvent, state: GameState):
        """Processes Reality's move; `state` is the state of the game after the round."""
        raise NotImplementedError

    def bound_records(self, state: GameState) -> Iterable[BoundRecord]:
        """Bounds the strategy can verify after the round that led to `state`."""
        return ()
