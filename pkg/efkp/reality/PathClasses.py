r"""
Generators realizing the path classes of the sharpness argument and the adversarial path of the validity
certificate. For a class function :math:`\psi`,

* :math:`\Omega_C`: :math:`c_n \psi(A_n^2)^3 / A_n \le C` eventually,
* :math:`\Omega_0`: :math:`A_n^2` bounded,
* :math:`\Omega_{=\infty}`: :math:`\limsup c_n \psi(A_n^2)^3 / A_n = \infty`, which is approximated on a finite
  horizon by bound spikes that exceed every previous value of the statistic.

The last generator builds a path on which the cycles of the sharpness strategy bet until their accounts have
decayed, which the path classes above only achieve for cycle indices far beyond reach.
"""

from typing import Optional, Tuple, Union

import numpy as np

from ._PathSource import PathSource
from ..stopping_times import CycleSchedule
from ..utils.class_functions import ClassFunction, get_class_function

PsiSpec = Union[str, ClassFunction]


def _resolve(psi: PsiSpec) -> ClassFunction:
    return psi if isinstance(psi, ClassFunction) else get_class_function(psi)


class OmegaCMargin(PathSource):
    r"""
    Paths in :math:`\Omega_C` with margin: after `warmup` unit rounds,

    .. math::
        c_n = \frac{(1-\delta') C A_{n-1}}{\psi(\kappa A_{n-1}^2)^3}, \qquad
        \kappa = 1 + \frac{((1-\delta')C)^2}{\psi(A_{n-1}^2)^6},

    and x = +c or -c at random. Since :math:`A_n^2 \le \kappa A_{n-1}^2`, every round past the warmup satisfies
    :math:`c_n \psi(A_n^2)^3 / A_n \le (1-\delta') C`. A^2 grows geometrically, which makes many cycles of a
    fast schedule reachable within a few thousand rounds.
    """
    kind = 'omega-C-margin'

    def __init__(self, C: float = 1., margin: float = 0.1, psi: PsiSpec = 'lower', warmup: int = 16,
                 seed: Optional[int] = None, rng: Optional[np.random.Generator] = None):
        assert C > 0
        assert 0 <= margin < 1
        assert warmup >= 1
        super().__init__(seed, rng)
        self.C = float(C)
        self.margin = float(margin)
        self.psi = _resolve(psi)
        self.warmup = int(warmup)

    def _next(self) -> Tuple[float, float]:
        sign = self._sign()
        if self.stats.n < self.warmup:
            return 1., sign
        A2 = self.stats.A2
        scaled = (1. - self.margin) * self.C
        kappa = 1. + scaled ** 2 / self.psi(A2) ** 6
        c = scaled * np.sqrt(A2) / self.psi(kappa * A2) ** 3
        return c, sign * c

    def params(self) -> dict:
        return {'C': self.C, 'margin': self.margin, 'psi': self.psi.name, 'warmup': self.warmup}


class OmegaZero(PathSource):
    """Geometrically shrinking bounds c_n = c0 * ratio^n with random signs, so that A^2 <= c0^2 r^2 / (1 - r^2)."""
    kind = 'omega-0'

    def __init__(self, c0: float = 1., ratio: float = 0.5, seed: Optional[int] = None,
                 rng: Optional[np.random.Generator] = None):
        assert c0 >= 0
        assert 0 <= ratio < 1
        super().__init__(seed, rng)
        self.c0 = float(c0)
        self.ratio = float(ratio)

    def _next(self) -> Tuple[float, float]:
        c = self.c0 * self.ratio ** (self.stats.n + 1)
        return c, self._sign() * c

    def params(self) -> dict:
        return {'c0': self.c0, 'ratio': self.ratio}


class OmegaInftySpike(PathSource):
    """
    Unit coin tossing interrupted by spikes c = 4^j * A_{n-1} at rounds start * 2^j, j = 1, 2, ..., in which the
    move stays a unit move. Each spike pushes c_n psi(A_n^2)^3 / A_n beyond four times its previous maximum.
    """
    kind = 'omega-infty-spike'

    def __init__(self, start: int = 16, seed: Optional[int] = None, rng: Optional[np.random.Generator] = None):
        assert start >= 1
        super().__init__(seed, rng)
        self.start = int(start)
        self._next_spike = 2 * self.start
        self._j = 1

    def _next(self) -> Tuple[float, float]:
        sign = self._sign()
        if self.stats.n + 1 == self._next_spike:
            c = 4. ** self._j * max(self.stats.A, 1.)
            self._j += 1
            self._next_spike *= 2
            return c, sign
        return 1., sign

    def params(self) -> dict:
        return {'start': self.start}


class AdversarialUpperCrossing(PathSource):
    r"""
    Deterministic path x_n = +c_n that keeps S_n >= A_n psi(A_n^2): `warmup` rounds with c = x = min(1, cap), then
    :math:`c_n = \min(\mathrm{cap}, C A_{n-1} / \psi(A_{n-1}^2)^3)`. The running maximum of the bounds therefore never
    exceeds `cap`.
    """
    kind = 'adversarial-upper-crossing'

    def __init__(self, C: float = 1., cap: float = np.inf, warmup: int = 16, psi: PsiSpec = 'upper',
                 seed: Optional[int] = None, rng: Optional[np.random.Generator] = None):
        assert C > 0
        assert cap > 0
        assert warmup >= 1
        super().__init__(seed, rng)
        self.C = float(C)
        self.cap = float(cap)
        self.warmup = int(warmup)
        self.psi = _resolve(psi)

    def _next(self) -> Tuple[float, float]:
        if self.stats.n < self.warmup:
            c = min(1., self.cap)
            return c, c
        A2 = self.stats.A2
        c = min(self.cap, self.C * np.sqrt(A2) / self.psi(A2) ** 3)
        return c, c

    def params(self) -> dict:
        return {'C': self.C, 'cap': self.cap, 'warmup': self.warmup, 'psi': self.psi.name}


class CycleRamp(PathSource):
    r"""
    Deterministic path on which the cycles of the sharpness strategy bet and complete. Moves come in pairs
    (+c, -c), so S is back at zero after every pair, and every threshold n_k is crossed by the second move of a pair.

    Within cycle k, with proportion :math:`\gamma_k` and W w-accounts, the bound is held at
    :math:`\theta \delta e^{w-1} / \gamma_k` until :math:`\gamma_k e^{-w} A \ge` `depth`, for w = 1, ..., W in turn,
    with A counted from the start of the cycle. w-account w thus bets just below its freezing threshold until its
    mixture has decayed, and freezes once the bound moves on. Afterwards the bound is `rate` A_{n-1} until the next
    threshold is within reach of one pair, whose bound is then chosen so that the first move stays below the
    threshold and the second one passes it.

    Parameters
    ----------
    beta : float, default = 2
        Exponent of the power schedule; ignored if `schedule` is given.
    delta : float, default = 0.5
        Freezing threshold of the strategy the path is built for.
    theta : float, default = 0.9
        Fraction of the freezing threshold at which the bound is held.
    depth : float, default = 2.3
        Value of gamma A at which a w-account counts as decayed.
    rate : float, default = 0.5
        Growth of the bound relative to A_{n-1} between the betting phases.
    psi : str or ClassFunction, default = 'lower'
        Class function of the strategy.
    schedule : CycleSchedule, optional
        Cycle thresholds of the strategy.
    """
    kind = 'cycle-ramp'

    def __init__(self, beta: float = 2., delta: float = 0.5, theta: float = 0.9, depth: float = 2.3,
                 rate: float = 0.5, psi: PsiSpec = 'lower', schedule: Optional[CycleSchedule] = None,
                 seed: Optional[int] = None, rng: Optional[np.random.Generator] = None):
        assert 0 < delta < 1
        assert 0 < theta < 1
        assert depth > 0
        assert rate > 0
        super().__init__(seed, rng)
        self.schedule = CycleSchedule(beta) if schedule is None else schedule
        self.delta = float(delta)
        self.theta = float(theta)
        self.depth = float(depth)
        self.rate = float(rate)
        self.psi = _resolve(psi)
        self._k = 0
        self._w = 1
        self._A2_start = 0.
        self._second: Optional[float] = None

    def _betting_bound(self, k: int, A2: float) -> Optional[float]:
        W = self.schedule.n_accounts(k)
        if W == 0:
            return None
        gamma = self.schedule.gamma(k, self.psi)
        A2_cycle = A2 - self._A2_start
        while self._w <= W:
            if (gamma * np.exp(-self._w)) ** 2 * A2_cycle < self.depth ** 2:
                return self.theta * self.delta * np.exp(self._w - 1) / gamma
            self._w += 1
        return None

    def _bound(self, k: int, A2: float) -> float:
        target = self.schedule.threshold(k + 1)
        if not np.isfinite(target):
            return self.rate * np.sqrt(A2) if A2 > 0 else 1.
        c = self._betting_bound(k, A2) if k >= 1 else None
        if c is None:
            c = self.rate * np.sqrt(A2)
        if A2 == 0 or A2 + 2 * c * c >= target:
            c = np.sqrt(0.75 * (target - A2))
        return c

    def _next(self) -> Tuple[float, float]:
        if self._second is not None:
            c, self._second = self._second, None
            return c, -c
        A2 = self.stats.A2
        k = self.schedule.index_at(A2)
        if k != self._k:
            self._k, self._w, self._A2_start = k, 1, A2
        c = float(self._bound(k, A2))
        self._second = c
        return c, c

    def params(self) -> dict:
        return {'schedule': repr(self.schedule), 'delta': self.delta, 'theta': self.theta, 'depth': self.depth,
                'rate': self.rate, 'psi': self.psi.name}
