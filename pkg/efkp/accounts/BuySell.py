r"""
Buy/sell process :math:`T_n = 2 Q^\gamma_n - K^{\gamma e}_n`: two units of the uniform mixture bought, one
constant-proportion account at proportion :math:`\gamma e` sold.
"""

from typing import List, Optional, Tuple

import numpy as np

from ._CapitalProcess import CapitalProcess
from .ConstantProportion import Account
from .UniformMixture import UniformMixtureAccount, gaussian_bound_certified, gaussian_log_bound
from ..bounds import ALPHA, BoundRecord, log_c1
from ..protocol import PathEvent


class BuySellAccount(CapitalProcess):
    """
    Both legs freeze together at the first round with gamma * e * c > delta, the freeze of the sold leg, which
    precedes the freeze of the mixture. Since both legs start at alpha, so does the composite.

    Parameters
    ----------
    gamma : float
        Proportion of the bought mixture.
    delta : float, default = 0.01
        Freezing threshold.
    n_nodes : int, default = 64
        Quadrature nodes of the mixture.
    """
    def __init__(self, gamma: float, delta: float = 0.01, n_nodes: int = 64):
        super().__init__(gamma, ALPHA, delta, freeze_factor=np.e)
        self.q = UniformMixtureAccount(gamma, n_nodes, delta)
        self.k_sold = Account(gamma * np.e, alpha=self.q.alpha, delta=delta)

    def __repr__(self) -> str:
        return f'BuySellAccount(gamma={self.gamma}, frozen={self.frozen}, stopped={self.stopped})'

    @property
    def excess(self) -> float:
        return 2 * self.q.excess - self.k_sold.excess

    def freeze(self, n: Optional[int] = None):
        super().freeze(n)
        self.q.freeze(n)
        self.k_sold.freeze(n)

    def stop(self, n: Optional[int] = None):
        super().stop(n)
        self.q.stop(n)
        self.k_sold.stop(n)

    def _bet(self) -> float:
        return 2 * self.q._bet() - self.k_sold._bet()  # pylint: disable=protected-access

    def _advance(self, x: float, c: float):
        self.q.step(x, c)
        self.k_sold.step(x, c)

    def bound_records(self, n: Optional[int] = None) -> List[BoundRecord]:
        return t_bounds(self, n)


def t_update(t: BuySellAccount, event: PathEvent) -> BuySellAccount:
    t.step(event.x, event.c)
    return t


def t_bounds(t: BuySellAccount, n: Optional[int] = None) -> List[BoundRecord]:
    r"""
    Upper bounds on :math:`T_n` (linear domain, T may be negative), one record per applicable case:

    * case (i), :math:`S \le \gamma A^2/e`, and case (iii), :math:`S \ge e\gamma A^2`: :math:`T_n \le C_1`
    * case (ii), in between: :math:`T_n \le 2 e^r \min\{e^{S^2/(2A^2)}\sqrt{2\pi}/(\gamma A), e^{\gamma S}\}`

    where :math:`r = \gamma^3 A^2 \bar c` and :math:`C_1` is given by :func:`~efkp.bounds.log_c1`.
    """
    n = t.rounds if n is None else n
    g, s = t.gamma, t.stats
    S, A2 = s.S, s.A2
    r = g ** 3 * A2 * s.cbar
    lhs = t.value
    C1 = float(np.exp(log_c1(r)))
    e = np.e

    records = []
    if S <= g * A2 / e:
        records.append(BoundRecord(n, 't-upper', 'case-i', lhs, C1))
    if g * A2 / e <= S <= e * g * A2:
        gauss, alternative = gaussian_log_bound(g, S, A2), g * S
        records.append(BoundRecord(n, 't-upper', 'case-ii', lhs, float(2 * np.exp(r + min(gauss, alternative))),
                                   strict=gaussian_bound_certified(g, A2, t.alpha) or alternative <= gauss))
    if S >= e * g * A2:
        records.append(BoundRecord(n, 't-upper', 'case-iii', lhs, C1))
    return records


def t_upper_bound(t: BuySellAccount) -> Tuple[float, bool]:
    """Tightest applicable upper bound on T_n and whether it is certified at finite n."""
    records = t_bounds(t)
    strict = [r.rhs for r in records if r.strict]
    if strict:
        return min(strict), True
    return min(r.rhs for r in records), False
