r"""
Uniform mixture of constant-proportion strategies,

.. math::
    Q_n = \int_{2/e}^1 \prod_{i \le n} (1 + u \gamma x_i) \, du, \qquad Q_0 = \alpha = 1 - 2/e,

realized as a fixed-node Gauss-Legendre mixture. The discrete mixture is itself a finite weighted mixture of
constant-proportion accounts at proportions :math:`u_j \gamma`, so it is an exact capital process.
"""

from typing import List, Optional

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss
from scipy.special import logsumexp

from ._CapitalProcess import CapitalProcess
from ..bounds import ALPHA, BoundRecord
from ..protocol import PathEvent

LOWER_NODE = 2. / np.e


class UniformMixtureAccount(CapitalProcess):
    """
    Gauss-Legendre realization of the uniform mixture over proportions u * gamma, u in [2/e, 1].

    Parameters
    ----------
    gamma : float
        Largest proportion of the mixture.
    n_nodes : int, default = 64
        Number of quadrature nodes.
    delta : float, default = 0.01
        Freezing threshold, applied to the largest proportion gamma.
    exact : bool, default = False
        Additionally keeps the coefficients of prod(1 + u gamma x_i) as a polynomial in u, which allows exact
        integration. Its cost grows with the number of rounds, so it is intended for short validation runs only.
    """
    def __init__(self, gamma: float, n_nodes: int = 64, delta: float = 0.01, exact: bool = False):
        assert gamma > 0
        assert n_nodes >= 1
        super().__init__(gamma, ALPHA, delta)
        t, w = leggauss(n_nodes)
        self.nodes = LOWER_NODE + (1. - LOWER_NODE) * (t + 1.) / 2.
        self.weights = (1. - LOWER_NODE) / 2. * w
        self._log_weights = np.log(self.weights)
        self._node_gamma = self.nodes * self.gamma
        self.log_nodes = np.zeros(n_nodes)
        self.poly: Optional[Polynomial] = Polynomial([1.]) if exact else None

    def __repr__(self) -> str:
        return f'UniformMixtureAccount(gamma={self.gamma}, n_nodes={len(self.nodes)}, frozen={self.frozen})'

    @property
    def node_values(self) -> np.ndarray:
        """prod(1 + u gamma x_i) at the quadrature nodes."""
        return np.exp(self.log_nodes)

    @property
    def excess(self) -> float:
        return float(np.sum(self.weights * np.expm1(self.log_nodes)))

    @property
    def log_capital(self) -> float:
        return float(logsumexp(self._log_weights + self.log_nodes))

    def _bet(self) -> float:
        return float(np.sum(self.weights * self._node_gamma * np.exp(self.log_nodes)))

    def _advance(self, x: float, c: float):
        self.log_nodes += np.log1p(self._node_gamma * x)
        if self.poly is not None:
            self.poly = self.poly * Polynomial([1., self.gamma * x])

    def exact_value(self) -> float:
        """Exact integral of the product polynomial over [2/e, 1]."""
        assert self.poly is not None, 'exact mode is disabled'
        antiderivative = self.poly.integ()
        return float(antiderivative(1.) - antiderivative(LOWER_NODE))

    def exact_bet(self) -> float:
        assert self.poly is not None, 'exact mode is disabled'
        if not self.active:
            return 0.
        antiderivative = (Polynomial([0., self.gamma]) * self.poly).integ()
        return float(antiderivative(1.) - antiderivative(LOWER_NODE))

    def bound_records(self, n: Optional[int] = None) -> List[BoundRecord]:
        return q_upper_bounds(self, n)


def q_update(q: UniformMixtureAccount, event: PathEvent) -> UniformMixtureAccount:
    q.step(event.x, event.c)
    return q


def q_bet(q: UniformMixtureAccount, c_next: float) -> float:
    return q.bet(c_next)


def gaussian_log_bound(gamma: float, S: float, A2: float) -> float:
    r"""Logarithm of :math:`e^{S^2/(2A^2)} \sqrt{2\pi} / (\gamma A)`, the integral over all u; inf for A = 0."""
    if A2 <= 0:
        return np.inf
    return float(S * S / (2 * A2) + np.log(np.sqrt(2 * np.pi) / (gamma * np.sqrt(A2))))


def gaussian_bound_certified(gamma: float, A2: float, alpha: float = ALPHA) -> bool:
    """
    Whether the Gaussian bound also covers the discrete mixture: it does as long as sqrt(2 pi) / (gamma A) >= alpha,
    because the discrete mixture never exceeds alpha times the maximum of its integrand.
    """
    return gamma * np.sqrt(A2) * alpha <= np.sqrt(2 * np.pi)


def q_upper_bounds(q: UniformMixtureAccount, n: Optional[int] = None) -> List[BoundRecord]:
    r"""
    Upper bounds on :math:`\ln Q_n` obtained by completing the square, one record per applicable case (the case
    ranges are closed, so boundary paths are checked against both neighbouring cases), plus the Gaussian bound.

    With :math:`r = \gamma^3 A^2 \bar c`:

    * case 1, :math:`S \le 2\gamma A^2/e`: :math:`r + 2\gamma (S/e - \gamma A^2/e^2)`
    * case 2, :math:`2\gamma A^2/e \le S \le \gamma A^2`: :math:`r + \min(G, \gamma S/2)`
    * case 3, :math:`S \ge \gamma A^2`: :math:`r + \min(G, \gamma S - \gamma^2 A^2/2)`

    where :math:`G` is the logarithmic Gaussian bound.
    """
    n = q.rounds if n is None else n
    g, s = q.gamma, q.stats
    S, A2 = s.S, s.A2
    r = g ** 3 * A2 * s.cbar
    lhs = q.log_capital
    gauss = gaussian_log_bound(g, S, A2)
    certified = gaussian_bound_certified(g, A2, q.alpha)
    e = np.e

    records = []
    if S <= 2 * g * A2 / e:
        records.append(BoundRecord(n, 'q-upper', 'case1', lhs, r + 2 * g * (S / e - g * A2 / e ** 2), log_domain=True))
    if 2 * g * A2 / e <= S <= g * A2:
        alternative = g * S / 2
        records.append(BoundRecord(n, 'q-upper', 'case2', lhs, r + min(gauss, alternative), log_domain=True,
                                   strict=certified or alternative <= gauss))
    if S >= g * A2:
        alternative = g * S - g * g * A2 / 2
        records.append(BoundRecord(n, 'q-upper', 'case3', lhs, r + min(gauss, alternative), log_domain=True,
                                   strict=certified or alternative <= gauss))
    if A2 > 0:
        records.append(BoundRecord(n, 'q-upper', 'gaussian', lhs, r + gauss, log_domain=True, strict=certified))
    return records
