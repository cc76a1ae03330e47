r"""
Cycle schedule and the stopping times of the sharpness strategy, evaluated on recorded paths.

All functions operate on :class:`PathStatistics`, whose arrays are indexed by round with index 0 holding the
initial state (S_0 = A_0^2 = 0), and return the first qualifying round or None if the path prefix never qualifies.
Thresholds are compared in linear domain; n_k = k^(beta k) becomes infinite once it exceeds the float range.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .utils.class_functions import ClassFunction


@dataclass(frozen=True)
class PathStatistics:
    """Bounds, moves and running statistics of a path, all of length N + 1 with a zero entry for round 0."""
    c: np.ndarray
    x: np.ndarray
    S: np.ndarray
    A2: np.ndarray
    cbar: np.ndarray

    @classmethod
    def from_events(cls, c: Sequence[float], x: Sequence[float]) -> 'PathStatistics':
        c = np.concatenate([[0.], np.asarray(c, dtype=float)])
        x = np.concatenate([[0.], np.asarray(x, dtype=float)])
        assert c.shape == x.shape
        return cls(c=c, x=x, S=np.cumsum(x), A2=np.cumsum(x ** 2), cbar=np.maximum.accumulate(c))

    def __len__(self) -> int:
        return len(self.c) - 1

    @property
    def A(self) -> np.ndarray:
        return np.sqrt(self.A2)


def _first(mask: np.ndarray, offset: int = 0) -> Optional[int]:
    if not mask.any():
        return None
    return offset + int(np.argmax(mask))


class CycleSchedule:
    r"""
    Round thresholds :math:`n_k = k^{\beta k}` (n_1 = 1) that divide the time axis into cycles
    :math:`[\tau_k, \tau_{k+1}]`, with :math:`\tau_k` the first round with :math:`A_n^2 \ge n_k`.

    Parameters
    ----------
    beta : float, default = 5
        Schedule exponent.
    thresholds : Sequence[float], optional
        Explicit values n_1, n_2, ... overriding the power schedule; must be positive and strictly increasing.
        Cycles beyond the list have infinite thresholds.
    """
    def __init__(self, beta: float = 5., thresholds: Optional[Sequence[float]] = None):
        assert beta > 0
        self.beta = float(beta)
        self.thresholds = None
        if thresholds is not None:
            thresholds = np.asarray(thresholds, dtype=float)
            if thresholds.ndim != 1 or np.any(thresholds <= 0) or np.any(np.diff(thresholds) <= 0):
                raise ValueError('schedule thresholds must be positive and strictly increasing')
            self.thresholds = thresholds

    def __repr__(self) -> str:
        if self.thresholds is not None:
            return f'CycleSchedule(thresholds={list(self.thresholds)})'
        return f'CycleSchedule(beta={self.beta})'

    def log_n(self, k: int) -> float:
        """ln n_k."""
        assert k >= 1
        if self.thresholds is not None:
            return float(np.log(self.thresholds[k - 1])) if k <= len(self.thresholds) else np.inf
        return self.beta * k * np.log(k)

    def threshold(self, k: int) -> float:
        """n_k; exact for integer powers that fit into a float."""
        assert k >= 1
        if self.thresholds is not None:
            return float(self.thresholds[k - 1]) if k <= len(self.thresholds) else np.inf
        with np.errstate(over='ignore'):
            return float(np.power(float(k), self.beta * k))

    @staticmethod
    def n_accounts(k: int) -> int:
        """Number ceil(ln k) of w-accounts of cycle k."""
        assert k >= 1
        return int(np.ceil(np.log(k) - 1e-12)) if k > 1 else 0

    def log_gamma(self, k: int, psi: ClassFunction) -> float:
        r"""ln of the cycle proportion :math:`\gamma_k = k^2 \psi(n_{k+1}) / \sqrt{n_{k+1}}`."""
        log_next = self.log_n(k + 1)
        return float(np.log(psi.of_log(log_next)) + 2 * np.log(k) - log_next / 2)

    def gamma(self, k: int, psi: ClassFunction) -> float:
        return float(np.exp(self.log_gamma(k, psi)))

    def log_tau_threshold(self, k: int, w: int) -> float:
        """ln of the A^2 level e^(2(w+2)) n_{k+1} / k^4 at which w-account w of cycle k stops."""
        assert 1 <= w
        return 2. * (w + 2) + self.log_n(k + 1) - 4. * np.log(k)

    def index_at(self, A2: float) -> int:
        """Largest k with n_k <= A^2, or 0 if there is none."""
        assert np.isfinite(A2)
        k = 0
        while self.threshold(k + 1) <= A2:
            k += 1
        return k


def compute_tau(stats, threshold: float) -> Optional[int]:
    """
    First round n with A_n^2 >= `threshold`.

    Parameters
    ----------
    stats : PathStatistics or np.ndarray
        The path, or its A^2 sequence including the zero entry of round 0.
    threshold : float
        Level of A^2.
    """
    A2 = stats.A2 if isinstance(stats, PathStatistics) else np.asarray(stats, dtype=float)
    return _first(A2 >= threshold)


def cycle_start(stats: PathStatistics, k: int, schedule: Optional[CycleSchedule] = None) -> Optional[int]:
    """tau_k of the schedule."""
    schedule = CycleSchedule() if schedule is None else schedule
    return compute_tau(stats, schedule.threshold(k))


def tau_kw(stats: PathStatistics, k: int, w: int, schedule: Optional[CycleSchedule] = None) -> Optional[int]:
    """First round at which w-account w of cycle k stops, i.e. A^2 >= e^(2(w+2)) n_{k+1} / k^4."""
    schedule = CycleSchedule() if schedule is None else schedule
    with np.errstate(over='ignore'):
        return compute_tau(stats, float(np.exp(schedule.log_tau_threshold(k, w))))


def sigma_abort(
        stats: PathStatistics,
        k: int,
        C: float,
        psi: ClassFunction,
        schedule: Optional[CycleSchedule] = None,
        delta: float = 0.01,
) -> Optional[int]:
    r"""
    First round :math:`n \ge \tau_k` with :math:`c_n \psi(A^2_{\tau_k})^3 > (1 + \delta) C A_{n-1}`, at which the
    k-th cycle is aborted.
    """
    tau = cycle_start(stats, k, schedule)
    if tau is None:
        return None
    start = max(tau, 1)
    scale = psi(stats.A2[tau]) ** 3
    A_prev = np.sqrt(stats.A2[start - 1:-1])
    return _first(stats.c[start:] * scale > (1 + delta) * C * A_prev, start)


def nu_success(
        stats: PathStatistics,
        k: int,
        psi: ClassFunction,
        schedule: Optional[CycleSchedule] = None,
) -> Optional[int]:
    r"""First round :math:`n \ge \tau_k` with :math:`S_n > A_n \psi(A_n^2)`; equality does not count."""
    tau = cycle_start(stats, k, schedule)
    if tau is None:
        return None
    A2 = stats.A2[tau:]
    positive = A2 > 0
    boundary = np.full_like(A2, np.inf)
    boundary[positive] = np.sqrt(A2[positive]) * psi(A2[positive])
    return _first(stats.S[tau:] > boundary, tau)


def freeze_round(c: Sequence[float], gamma: float, delta: float) -> Optional[int]:
    """First round n >= 1 with gamma * c_n > delta, given the bounds c_1, c_2, ... of the path."""
    return _first(gamma * np.asarray(c, dtype=float) > delta, 1)


@dataclass
class CycleState:
    """
    Stopping times of cycle k on a recorded path.

    Attributes
    ----------
    phase : {'running', 'aborted-waiting', 'succeeded-waiting'}
        'running' if neither the abort time sigma nor the success time nu precedes tau_{k+1}, otherwise the phase
        the dynamic strategy enters at the earlier of the two.
    """
    k: int
    tau_k: Optional[int]
    tau_next: Optional[int]
    tau_kw: List[Optional[int]] = field(default_factory=list)
    sigma_kC: Optional[int] = None
    nu_k: Optional[int] = None
    phase: str = 'running'


def cycle_state(
        stats: PathStatistics,
        k: int,
        C: float,
        psi: ClassFunction,
        schedule: Optional[CycleSchedule] = None,
        delta: float = 0.01,
) -> CycleState:
    """Evaluates all stopping times of cycle k on the recorded path."""
    schedule = CycleSchedule() if schedule is None else schedule
    state = CycleState(
        k=k,
        tau_k=cycle_start(stats, k, schedule),
        tau_next=cycle_start(stats, k + 1, schedule),
        tau_kw=[tau_kw(stats, k, w, schedule) for w in range(1, schedule.n_accounts(k) + 1)],
        sigma_kC=sigma_abort(stats, k, C, psi, schedule, delta),
        nu_k=nu_success(stats, k, psi, schedule),
    )
    end = np.inf if state.tau_next is None else state.tau_next
    sigma = np.inf if state.sigma_kC is None else state.sigma_kC
    nu = np.inf if state.nu_k is None else state.nu_k
    if min(sigma, nu) < end:
        state.phase = 'aborted-waiting' if sigma <= nu else 'succeeded-waiting'
    return state
