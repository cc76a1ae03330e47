"""
Random paths that ignore Skeptic: symmetric coin tossing and uniformly distributed bounded moves.
"""

from typing import Optional, Tuple

import numpy as np

from ._PathSource import PathSource


class BernoulliSymmetric(PathSource):
    """Constant bound `c` and x = +c or -c with probability 1/2 each."""
    kind = 'bernoulli-symmetric'

    def __init__(self, c: float = 1., seed: Optional[int] = None, rng: Optional[np.random.Generator] = None):
        assert c >= 0
        super().__init__(seed, rng)
        self.c = float(c)

    def _next(self) -> Tuple[float, float]:
        return self.c, self._sign() * self.c

    def params(self) -> dict:
        return {'c': self.c}


class UniformBounded(PathSource):
    """Bound c uniform on [c_min, c_max] and x uniform on [-c, c]."""
    kind = 'uniform-bounded'

    def __init__(self, c_min: float = 1., c_max: float = 1., seed: Optional[int] = None,
                 rng: Optional[np.random.Generator] = None):
        assert 0 <= c_min <= c_max
        super().__init__(seed, rng)
        self.c_min = float(c_min)
        self.c_max = float(c_max)

    def _next(self) -> Tuple[float, float]:
        c = self.c_min + (self.c_max - self.c_min) * self._uniform()
        x = c * (2. * self._uniform() - 1.)
        return c, x

    def params(self) -> dict:
        return {'c_min': self.c_min, 'c_max': self.c_max}
