"""
A module that defines the common interface of Forecaster/Reality path generators.
"""

from abc import ABC, abstractmethod
from typing import Iterator, Optional, Tuple

import numpy as np

from ..protocol import PathEvent, RunningStats

BUFFER_SIZE = 4096


class PathSource(ABC):
    """
    The base class for all path sources. A path source is an iterator of :class:`~efkp.protocol.PathEvent`
    instances that keeps the running statistics of the path it has emitted, so that feedback rules can depend on
    A_{n-1}.

    Parameters
    ----------
    seed : int, optional
        Seed of the random number generator; ignored if `rng` is given.
    rng : np.random.Generator, optional
        Random number generator of the path.
    """
    kind: str = ''

    def __init__(self, seed: Optional[int] = None, rng: Optional[np.random.Generator] = None):
        self._rng = rng if rng is not None else np.random.default_rng(seed)
        self.stats = RunningStats()
        self._buffer = np.empty(0)
        self._position = 0

    def __iter__(self) -> Iterator[PathEvent]:
        return self

    def __next__(self) -> PathEvent:
        c, x = self._next()
        event = PathEvent(float(c), float(x))
        self.stats.update(event.c, event.x)
        return event

    def _uniform(self) -> float:
        """Next uniform variate on [0, 1), drawn from the generator in chunks."""
        if self._position == len(self._buffer):
            self._buffer = self._rng.random(BUFFER_SIZE)
            self._position = 0
        value = self._buffer[self._position]
        self._position += 1
        return value

    def _sign(self) -> float:
        return 1. if self._uniform() < 0.5 else -1.

    @abstractmethod
    def _next(self) -> Tuple[float, float]:
        """Bound and move of the next round."""
        raise NotImplementedError

    def params(self) -> dict:
        """Parameters of the source, e.g. for output files."""
        return {}
