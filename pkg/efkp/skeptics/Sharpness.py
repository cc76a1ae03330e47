r"""
Sharpness strategy: cycles between the thresholds of a :class:`~efkp.stopping_times.CycleSchedule`, the discrete
mixture D of buy/sell processes of a cycle with sequential stopping of its accounts, the rescaled process

.. math::
    Y = \alpha + \frac{\lceil \ln k \rceil \psi(n_{k+1}) e^{-\psi(n_{k+1})^2/2}}{D} (\alpha - D),

the dynamic strategy that chains the cycles and waits after aborted or successful ones, and the mixture of
dynamic strategies over the constant C of the path class.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from ._Skeptic import Skeptic
from .Basic import MixtureSkeptic
from ..accounts.BuySell import BuySellAccount, t_upper_bound
from ..accounts.UniformMixture import gaussian_log_bound
from ..bounds import BoundParams, BoundRecord, BoundReport
from ..exceptions import DomainError
from ..protocol import GameState, PathEvent
from ..stopping_times import CycleSchedule
from ..utils.class_functions import ClassFunction, get_class_function, integral_I_log, integrand
from ..utils.io import write_rows_csv

CYCLE_FIELDS = ('k', 'tau_k', 'end', 'outcome', 'claimed_factor', 'realized_factor', 'y_start', 'y_min', 'd_max')

OUTCOMES = ('advanced', 'aborted-sigma', 'aborted-lower', 'aborted-guard', 'succeeded-nu', 'running')

REENTRY_MODES = ('A', 'tau')


def _resolve(psi: Union[str, ClassFunction]) -> ClassFunction:
    return psi if isinstance(psi, ClassFunction) else get_class_function(psi)


class CycleMixture:
    r"""
    Mixture :math:`D = \frac{1}{W} \sum_{w=1}^W T^{\gamma_k e^{-w}}` of the buy/sell processes of cycle k,
    W = ceil(ln k), and the process Y derived from it. The accounts start at the beginning of the cycle, so their
    statistics count from there, and account w stops after the round in which the global A^2 first reaches
    e^(2(w+2)) n_{k+1} / k^4.

    Parameters
    ----------
    k : int
        Cycle index.
    psi : ClassFunction
        Class function of the boundary.
    schedule : CycleSchedule
        Cycle thresholds.
    params : BoundParams
        Freezing threshold and the scaling constant D.
    n_nodes : int, default = 64
        Quadrature nodes of the uniform mixtures.
    """
    def __init__(self, k: int, psi: ClassFunction, schedule: CycleSchedule, params: BoundParams, n_nodes: int = 64):
        assert k >= 1
        self.k = k
        self.psi = psi
        self.schedule = schedule
        self.params = params
        self.alpha = params.alpha
        # a cycle without finite successor threshold never completes and holds no accounts
        bounded = bool(np.isfinite(schedule.log_n(k + 1)))
        self.W = schedule.n_accounts(k) if bounded else 0
        self.log_gamma = schedule.log_gamma(k, psi) if bounded else -np.inf
        self.gamma = float(np.exp(self.log_gamma))
        self.accounts = [BuySellAccount(self.gamma * np.exp(-w), params.delta, n_nodes) for w in range(1, self.W + 1)]
        self.log_stop_levels = np.array([schedule.log_tau_threshold(k, w) for w in range(1, self.W + 1)])
        self.stop_rounds: List[Optional[int]] = [None] * self.W
        if self.W > 0:
            psi_next = float(psi.of_log(schedule.log_n(k + 1)))
            self.log_coef = float(np.log(self.W) + np.log(psi_next) - psi_next ** 2 / 2 - params.log_D)
        else:
            self.log_coef = -np.inf
        self.coef = float(np.exp(self.log_coef))
        self.rounds = 0
        self.S = 0.
        self.A2 = 0.
        self.cbar = 0.

    def __repr__(self) -> str:
        return f'CycleMixture(k={self.k}, W={self.W}, gamma={self.gamma:.3g}, rounds={self.rounds})'

    @property
    def d_excess(self) -> float:
        if self.W == 0:
            return 0.
        return float(np.mean([account.excess for account in self.accounts]))

    @property
    def d_value(self) -> float:
        return self.alpha + self.d_excess

    @property
    def y_excess(self) -> float:
        return -self.coef * self.d_excess

    @property
    def y_value(self) -> float:
        return self.alpha + self.y_excess

    @property
    def claimed_factor(self) -> float:
        """Growth factor 1 + (1 - delta) coef claimed for a cycle that completes."""
        return 1. + (1. - self.params.delta) * self.coef

    def bet_d(self, c: float) -> float:
        """Bet of D for the upcoming round; accounts with e gamma c > delta freeze."""
        if self.W == 0:
            return 0.
        return float(np.mean([account.bet(c) for account in self.accounts]))

    def bet_y(self, c: float) -> float:
        return -self.coef * self.bet_d(c)

    def step(self, x: float, c: float, A2: float, n: Optional[int] = None) -> List[int]:
        """
        Plays one round and stops the accounts whose level the global `A2` has reached.

        Returns
        -------
        List[int]
            Indices w of the accounts stopped in this round.
        """
        self.rounds += 1
        self.S += x
        self.A2 += x * x
        self.cbar = max(self.cbar, c)
        for account in self.accounts:
            account.step(x, c)
        stopped = []
        with np.errstate(divide='ignore'):
            log_A2 = np.log(A2)
        for w, account in enumerate(self.accounts, start=1):
            if not account.stopped and log_A2 >= self.log_stop_levels[w - 1]:
                account.stop()
                self.stop_rounds[w - 1] = n
                stopped.append(w)
        return stopped

    @property
    def all_stopped(self) -> bool:
        return all(account.stopped for account in self.accounts)


def cycle_mixture_step(cm: CycleMixture, event: PathEvent, A2: float, n: Optional[int] = None) -> CycleMixture:
    cm.step(event.x, event.c, A2, n)
    return cm


def _max_min_exponent(S: float, A2: float, lo: float, hi: float) -> float:
    r"""
    :math:`\max_{\gamma \in [lo, hi]} \min(G(\gamma), \gamma S)` with the logarithmic Gaussian bound G, which
    decreases in gamma.
    """
    if A2 <= 0:
        return max(lo * S, hi * S)
    if S <= 0:
        return min(gaussian_log_bound(lo, S, A2), lo * S)

    def gap(gamma):
        return gaussian_log_bound(gamma, S, A2) - gamma * S

    if gap(lo) <= 0:
        return gaussian_log_bound(lo, S, A2)
    if gap(hi) >= 0:
        return hi * S
    return float(brentq(gap, lo, hi, xtol=1e-14, rtol=1e-12)) * S


def y_bounds(cm: CycleMixture, state: GameState, params: Optional[BoundParams] = None) -> BoundReport:
    r"""
    Bounds on the processes of a running cycle:

    * 'remainder-const': :math:`(\gamma_k e^{-w})^3 A^2 \bar c \le (1+\delta)^5 C e^6` for every open account,
      with the statistics counted from the start of the cycle,
    * 'd-upper', case 'accounts': D is at most the mean of the per-account bounds on T (strict where the account
      bounds are),
    * 'd-upper', case 'interval': D is at most
      :math:`(3 \cdot 2 e^{R} \max_\gamma \min(G(\gamma), e^{\gamma S}) + W \bar C_1) / W`, since at most three
      proportions of the geometric grid fall into the range where S is close to gamma A^2 (log domain),
    * 'y-lower': :math:`Y \ge \alpha / 2`.

    All but the per-account bound rest on the cycle being far enough in the schedule.
    """
    params = cm.params if params is None else params
    n, k = state.n, cm.k
    report = BoundReport()
    for w, account in enumerate(cm.accounts, start=1):
        if account.active:
            s = account.stats
            report.add(BoundRecord(n, 'remainder-const', f'w={w}', account.gamma ** 3 * s.A2 * s.cbar,
                                   params.remainder_const, strict=False, k=k))
    if cm.W > 0:
        bounds = [t_upper_bound(account) for account in cm.accounts]
        report.add(BoundRecord(n, 'd-upper', 'accounts', cm.d_value, float(np.mean([b for b, _ in bounds])),
                               strict=all(strict for _, strict in bounds), k=k))

        lo, hi = cm.gamma * np.exp(-cm.W), cm.gamma * np.exp(-1)
        peak = np.log(6.) + params.remainder_const + _max_min_exponent(cm.S, cm.A2, lo, hi)
        log_rhs = float(np.logaddexp(peak, np.log(cm.W) + params.log_C1bar) - np.log(cm.W))
        d = cm.d_value
        report.add(BoundRecord(n, 'd-upper', 'interval', float(np.log(d)) if d > 0 else -np.inf, log_rhs,
                               log_domain=True, strict=False, k=k))
    report.add(BoundRecord(n, 'y-lower', 'running', cm.alpha / 2, cm.y_value, strict=False, k=k))
    return report


@dataclass
class CycleRecord:
    """One cycle of the dynamic strategy; `end` is the round at which the cycle was left."""
    k: int
    tau_k: int
    end: Optional[int] = None
    outcome: str = 'running'
    claimed_factor: float = 1.
    realized_factor: float = 1.
    y_start: float = np.nan
    y_min: float = np.nan
    d_max: float = np.nan

    def as_row(self) -> dict:
        return {name: getattr(self, name) for name in CYCLE_FIELDS}


class DynamicStrategy(Skeptic):
    r"""
    Chains the cycle processes: Y of cycle k is played on :math:`[\tau_k, \tau_{k+1}]` with the capital
    accumulated so far as unit, i.e. the capital is :math:`B Y / \alpha` for the capital B at the start of the
    cycle. A cycle is left

    * at :math:`\tau_{k+1}`, after which cycle k+1 starts ('advanced'),
    * before a round with :math:`c_n \psi(A^2_{\tau_k})^3 > (1+\delta) C A_{n-1}` ('aborted-sigma'),
    * after a round with :math:`S_n > A_n \psi(A_n^2)` ('succeeded-nu'),
    * after a round with :math:`S_n < -A_n \psi^U(A_n^2)` ('aborted-lower'),
    * before a round whose bet could exceed the capital ('aborted-guard').

    After an abort or a success the strategy stops betting until some :math:`\tau_{k'}`, k' > k, at which
    :math:`-A \psi^U(A^2) \le S \le A \psi(A^2)`; with `reentry_mode` 'tau' the condition uses
    :math:`\sqrt{n} \psi^U(n)` and :math:`\sqrt{n} \psi(n)` at round n instead.

    Parameters
    ----------
    params : BoundParams, optional
        Freezing threshold, the constant C of the path class and the scaling constant D.
    psi : str or ClassFunction, default = 'lower'
        Class function of the boundary.
    schedule : CycleSchedule, optional
        Cycle thresholds; defaults to n_k = k^(5k).
    reentry_mode : {'A', 'tau'}, default = 'A'
        Form of the re-entry condition.
    n_nodes : int, default = 64
        Quadrature nodes of the uniform mixtures.
    logger : logging.Logger, default = None
        Logger instance used for intermediate output. If None, an internal logger instance will be created.
    verbose : {0, 1, 2, 3}, default = 0
        Verbosity level.
    """
    def __init__(
            self,
            params: Optional[BoundParams] = None,
            psi: Union[str, ClassFunction] = 'lower',
            schedule: Optional[CycleSchedule] = None,
            reentry_mode: str = 'A',
            n_nodes: int = 64,
            logger: logging.Logger = None,
            verbose: int = 0,
    ):
        params = BoundParams() if params is None else params
        super().__init__(params.alpha, logger, verbose)
        if reentry_mode not in REENTRY_MODES:
            raise ValueError(f'unknown re-entry mode: {reentry_mode}')
        self.params = params
        self.psi = _resolve(psi)
        self.psi_upper = ClassFunction.upper(self.psi.threshold)
        self.schedule = CycleSchedule() if schedule is None else schedule
        self.reentry_mode = reentry_mode
        self.n_nodes = n_nodes

        self.log_base = float(np.log(self.alpha))
        self.k = 0
        self.cycle: Optional[CycleMixture] = None
        self.ledger: List[CycleRecord] = []
        self._A2 = 0.
        self._psi_cubed_start = np.nan
        self._pending: List[BoundRecord] = []

    @property
    def running(self) -> bool:
        return self.cycle is not None

    @property
    def log_capital(self) -> float:
        if self.cycle is None:
            return self.log_base
        ratio = self.cycle.y_excess / self.alpha
        return self.log_base + float(np.log1p(ratio)) if ratio > -1 else -np.inf

    def _start(self, k: int, state: GameState, c: float, A_prev: float):
        self.k = k
        self.cycle = CycleMixture(k, self.psi, self.schedule, self.params, self.n_nodes)
        self._psi_cubed_start = float(self.psi(state.A2)) ** 3
        self.ledger.append(CycleRecord(k, state.n, claimed_factor=self.cycle.claimed_factor,
                                       y_start=self.cycle.y_value, y_min=self.cycle.y_value, d_max=self.cycle.d_value))
        self._logger.info(f'round {state.n}: cycle {k} starts with {self.cycle.W} accounts, '
                          f'gamma={self.cycle.gamma:.4g}')
        if self._sigma_triggered(c, A_prev):
            self._leave(state.n, 'aborted-sigma')

    def _leave(self, n: int, outcome: str):
        cycle, record = self.cycle, self.ledger[-1]
        record.end = n
        record.outcome = outcome
        record.realized_factor = cycle.y_value / self.alpha
        self.log_base = self.log_capital
        self.cycle = None
        self._logger.info(f'round {n}: cycle {cycle.k} {outcome}, factor {record.realized_factor:.6g}')
        if outcome == 'advanced' and cycle.W > 0:
            self._pending.append(BoundRecord(n, 'cycle-growth', 'advanced', record.claimed_factor,
                                             record.realized_factor, strict=False, k=cycle.k))

    def _sigma_triggered(self, c: float, A_prev: float) -> bool:
        return c * self._psi_cubed_start > (1 + self.params.delta) * self.params.C * A_prev

    def fraction(self, state: GameState, c: float) -> float:
        cycle = self.cycle
        if cycle is None:
            return 0.
        if self._sigma_triggered(c, state.A):
            self._leave(state.n, 'aborted-sigma')
            return 0.
        bet = cycle.bet_y(c)
        y = cycle.y_value
        if y - abs(bet) * c < 0:
            self._leave(state.n, 'aborted-guard')
            return 0.
        return bet / y

    def _within_range(self, S: float, A: float, A2: float) -> bool:
        return -A * self.psi_upper(A2) <= S <= A * self.psi(A2)

    def _reentry_allowed(self, state: GameState) -> bool:
        if self.reentry_mode == 'tau':
            n = float(state.n)
            return -np.sqrt(n) * self.psi_upper(n) <= state.S <= np.sqrt(n) * self.psi(n)
        return self._within_range(state.S, state.A, state.A2)

    def observe(self, event: PathEvent, state: GameState):
        A_prev, A2_prev = np.sqrt(self._A2), self._A2
        self._A2 = state.A2

        if self.cycle is None:
            crossed = self.schedule.index_at(state.A2)
            if crossed > self.schedule.index_at(A2_prev) and crossed > self.k:
                if self.k == 0 or self._reentry_allowed(state):
                    self._start(crossed, state, event.c, A_prev)
                else:
                    self._logger.info(f'round {state.n}: no re-entry at tau_{crossed}')
        else:
            for w in self.cycle.step(event.x, event.c, state.A2, state.n):
                self._pending.append(BoundRecord(
                    state.n, 'stop-before-freeze', f'w={w}',
                    self.cycle.gamma * np.exp(1 - w) * self.cycle.cbar, self.params.delta, strict=False, k=self.k))
            record = self.ledger[-1]
            record.y_min = min(record.y_min, self.cycle.y_value)
            record.d_max = max(record.d_max, self.cycle.d_value)

        while self.cycle is not None:
            k = self.cycle.k
            if state.A2 > 0 and state.S > state.A * self.psi(state.A2):
                self._leave(state.n, 'succeeded-nu')
            elif state.S < -state.A * self.psi_upper(state.A2):
                self._leave(state.n, 'aborted-lower')
            elif state.A2 >= self.schedule.threshold(k + 1):
                if self.cycle.W > 0:
                    self._pending.append(BoundRecord(state.n, 'all-accounts-stop', 'tau-next',
                                                     float(self.cycle.log_stop_levels[-1]), float(np.log(state.A2)),
                                                     log_domain=True, strict=False, k=k))
                self._leave(state.n, 'advanced')
                self._start(k + 1, state, event.c, A_prev)
            else:
                break

    def bound_records(self, state: GameState) -> Iterable[BoundRecord]:
        records, self._pending = self._pending, []
        if self.cycle is not None:
            records.extend(y_bounds(self.cycle, state, self.params))
        return records

    def cycle_ledger(self) -> List[CycleRecord]:
        """Closed cycles followed by the running one, whose factors refer to the current round."""
        if self.cycle is not None:
            self.ledger[-1].realized_factor = self.cycle.y_value / self.alpha
        return list(self.ledger)

    def ledger_to_csv(self, path):
        write_rows_csv(path, CYCLE_FIELDS, (r.as_row() for r in self.cycle_ledger()))


def dynamic_strategy(
        params: Optional[BoundParams] = None,
        psi: Union[str, ClassFunction] = 'lower',
        schedule: Optional[CycleSchedule] = None,
        **kwargs,
) -> DynamicStrategy:
    return DynamicStrategy(params, psi, schedule, **kwargs)


def outer_c_mixture(
        params: Optional[BoundParams] = None,
        psi: Union[str, ClassFunction] = 'lower',
        schedule: Optional[CycleSchedule] = None,
        C_max: int = 8,
        weights: Optional[Sequence[float]] = None,
        **kwargs,
) -> MixtureSkeptic:
    """
    Mixture of the dynamic strategies for C = 1, ..., C_max with weights 2^-C by default; the residual weight is
    held as cash. Keyword arguments are handed to :class:`DynamicStrategy`.
    """
    assert C_max >= 1
    params = BoundParams() if params is None else params
    weights = 2. ** -np.arange(1, C_max + 1) if weights is None else np.asarray(weights, dtype=float)
    assert len(weights) == C_max
    psi = _resolve(psi)
    skeptics = [DynamicStrategy(replace(params, C=float(C)), psi, schedule, **kwargs) for C in range(1, C_max + 1)]
    return MixtureSkeptic(skeptics, weights, logger=kwargs.get('logger'), verbose=kwargs.get('verbose', 0))


def timescale_equivalence_check(psi: Union[str, ClassFunction], k_lo: int, k_hi: int, beta: float = 5.) -> BoundReport:
    r"""
    Compares the integral test in :math:`\lambda` over :math:`[n_{k_{lo}}, n_{k_{hi}}]`, :math:`n_k = k^{\beta k}`,
    with the sum over the cycles. With :math:`f(k) = \psi(n_k) e^{-\psi(n_k)^2/2}`,
    :math:`J = \int \ln(k) f(k) dk` and :math:`\Sigma = \sum_k \ln(k) f(k)`, it records

    * 'sum-lower' and 'sum-upper': :math:`\Sigma/2 \le J \le 2\Sigma`,
    * 'jacobian-lower' and 'jacobian-upper': :math:`J \le I/\beta \le 2J`, since
      :math:`d\lambda/\lambda = \beta(\ln k + 1) dk`; the upper one requires k_lo >= e.

    Raises
    ------
    DomainError
        If k_lo < 2, where ln k vanishes.
    """
    if k_lo < 2:
        raise DomainError(f'time scale comparison needs k_lo >= 2, got {k_lo}')
    assert k_lo < k_hi
    psi = _resolve(psi)

    def f(k):
        return integrand(psi.of_log(beta * k * np.log(k)))

    ks = np.arange(k_lo, k_hi + 1, dtype=float)
    total = float(np.sum(np.log(ks) * f(ks)))
    J = quad(lambda k: np.log(k) * f(k), k_lo, k_hi, epsabs=1e-14, epsrel=1e-10, limit=500)[0]
    I = integral_I_log(psi, beta * k_lo * np.log(k_lo), beta * k_hi * np.log(k_hi)).value
    return BoundReport([
        BoundRecord(k_hi, 'timescale', 'sum-lower', total / 2, J, strict=False),
        BoundRecord(k_hi, 'timescale', 'sum-upper', J, 2 * total, strict=False),
        BoundRecord(k_hi, 'timescale', 'jacobian-lower', J, I / beta),
        BoundRecord(k_hi, 'timescale', 'jacobian-upper', I / beta, 2 * J, strict=k_lo >= np.e),
    ])


def cycle_growth_trends(
        psi: Union[str, ClassFunction],
        schedule: Optional[CycleSchedule] = None,
        ks: Optional[Sequence[int]] = None,
) -> Dict[str, np.ndarray]:
    r"""
    Finite-k values of the sequences that govern the growth of a cycle on the unit path (A_n^2 = n, so
    :math:`A^2_{\tau_k} = n_k`), together with their limits:

    * 'upper_ratio': :math:`\psi^U(n_k) / \psi(n_{k+1}) \to 1`,
    * 'gap': :math:`k^\beta n_k / n_{k+1} \to e^{-\beta}`,
    * 'gamma_scale': :math:`\gamma_k \sqrt{n_k} \psi(n_{k+1}) \to 0` (for beta > 4).
    """
    psi = _resolve(psi)
    schedule = CycleSchedule() if schedule is None else schedule
    ks = np.arange(2, 12) if ks is None else np.asarray(ks)
    upper = ClassFunction.upper(psi.threshold)
    log_n = np.array([schedule.log_n(k) for k in ks])
    log_next = np.array([schedule.log_n(k + 1) for k in ks])
    psi_next = np.asarray(psi.of_log(log_next), dtype=float)
    log_gamma = np.array([schedule.log_gamma(k, psi) for k in ks])
    return {
        'k': ks,
        'upper_ratio': np.asarray(upper.of_log(log_n), dtype=float) / psi_next,
        'gap': np.exp(schedule.beta * np.log(ks) + log_n - log_next),
        'gamma_scale': np.exp(log_gamma + log_n / 2 + np.log(psi_next)),
        'limits': np.array([1., np.exp(-schedule.beta), 0.]),
    }
