r"""
Post-hoc classification of recorded paths into the path classes, based on the statistic
:math:`c_n \psi(A_n^2)^3 / A_n`. Unboundedness of A^2 and of the statistic can only be judged by finite-horizon
proxies.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ..stopping_times import PathStatistics
from ..utils.class_functions import ClassFunction, get_class_function


@dataclass(frozen=True)
class PathClassification:
    """
    Attributes
    ----------
    omega_C : bool or None
        Whether the statistic stays below (1 - margin) C past the warmup; None if no C was given.
    omega_0 : bool
        Whether A^2 has settled, i.e. grew by at most `settle_tol` (relative) over the second half of the path.
    omega_infty : bool
        Whether the running maximum of the statistic doubled at least `min_records` times past the warmup.
    max_statistic : float
        Largest value of the statistic past the warmup.
    records : int
        Number of doublings of the running maximum past the warmup.
    A2_final : float
        A^2 at the end of the path.
    """
    omega_C: Optional[bool]
    omega_0: bool
    omega_infty: bool
    max_statistic: float
    records: int
    A2_final: float


def omega_statistic(stats: PathStatistics, psi: ClassFunction) -> np.ndarray:
    """c_n psi(A_n^2)^3 / A_n for rounds 1..N (NaN while A_n = 0)."""
    A2 = stats.A2[1:]
    values = np.full(len(A2), np.nan)
    positive = A2 > 0
    values[positive] = stats.c[1:][positive] * psi(A2[positive]) ** 3 / np.sqrt(A2[positive])
    return values


def _doublings(values: np.ndarray) -> int:
    count, level = 0, np.nan
    for value in values[np.isfinite(values)]:
        if np.isnan(level):
            level = value
        elif value > 2 * level:
            count += 1
            level = value
    return count


def classify_path(
        c: Sequence[float],
        x: Sequence[float],
        psi: Union[str, ClassFunction] = 'lower',
        C: Optional[float] = None,
        margin: float = 0.,
        warmup: int = 0,
        settle_tol: float = 1e-6,
        min_records: int = 3,
        tol: float = 1e-9,
) -> PathClassification:
    """
    Classifies the path with bounds `c` and moves `x`.

    Parameters
    ----------
    c, x : Sequence[float]
        Bounds and moves of rounds 1..N.
    psi : str or ClassFunction, default = 'lower'
        Class function of the statistic.
    C : float, optional
        Constant of Omega_C to test membership for.
    margin : float, default = 0
        Required relative margin below C.
    warmup : int, default = 0
        Number of initial rounds that are ignored.
    """
    psi = psi if isinstance(psi, ClassFunction) else get_class_function(psi)
    stats = PathStatistics.from_events(c, x)
    statistic = omega_statistic(stats, psi)[warmup:]
    finite = statistic[np.isfinite(statistic)]
    max_statistic = float(finite.max()) if len(finite) else 0.

    omega_C = None
    if C is not None:
        omega_C = bool(max_statistic <= (1 - margin) * C * (1 + tol))

    N = len(stats)
    A2_final = float(stats.A2[-1])
    growth = A2_final - float(stats.A2[N // 2])
    omega_0 = bool(growth <= settle_tol * max(1., A2_final))

    records = _doublings(statistic)
    return PathClassification(
        omega_C=omega_C,
        omega_0=omega_0,
        omega_infty=records >= min_records,
        max_statistic=max_statistic,
        records=records,
        A2_final=A2_final,
    )
