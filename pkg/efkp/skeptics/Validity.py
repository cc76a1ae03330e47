r"""
Validity strategy: the countable mixture

.. math::
    \mathcal{K}_n = \sum_k p_k K^{\gamma_k}_n, \qquad \gamma_k = \psi(k) / \sqrt{k},

of frozen constant-proportion accounts, truncated at k_max with the remaining weight held as cash, together with the
finite-n lower-bound certificate at rounds where S_n reaches A_n psi(A_n^2).
"""

import logging
from dataclasses import replace
from typing import Iterable, List, Optional, Union

import numpy as np

from ._Skeptic import Skeptic
from ..accounts.ConstantProportion import AccountBank
from ..bounds import EXPECTED_ASYMPTOTIC, BoundParams, BoundRecord, BoundReport, bar_c_bound
from ..protocol import GameState, PathEvent
from ..utils.class_functions import ClassFunction, MixtureWeights, build_blocking_weights, get_class_function

CERTIFICATE_BOUNDS = ('exponent', 'deltaconst', 'psi-doubling', 'bar-c', 'keep-open', 'final')


class ValidityMixture(Skeptic):
    """
    Parameters
    ----------
    psi : str or ClassFunction, default = 'upper'
        Class function with convergent integral test; user functions are clipped between the builtin lower and
        upper functions.
    k_max : int, default = 10000
        Number of materialized accounts.
    params : BoundParams, optional
        Freezing threshold delta and the constant C used by the certificate.
    k_norm : int, optional
        Normalization horizon of the weights, see :func:`~efkp.utils.class_functions.build_blocking_weights`.
    multipliers : array or callable, optional
        Override of the blocking multipliers a_k.
    weights : MixtureWeights, optional
        Precomputed weights, which skips their construction.
    k_min : int, default = 1
        Certificate windows starting below k_min are reported with case id 'expected-asymptotic', since the
        hypotheses of the certificate only hold for large windows.
    logger : logging.Logger, default = None
        Logger instance used for intermediate output. If None, an internal logger instance will be created.
    verbose : {0, 1, 2, 3}, default = 0
        Verbosity level.
    """
    def __init__(
            self,
            psi: Union[str, ClassFunction] = 'upper',
            k_max: int = 10 ** 4,
            params: Optional[BoundParams] = None,
            k_norm: Optional[int] = None,
            multipliers=None,
            weights: Optional[MixtureWeights] = None,
            k_min: int = 1,
            logger: logging.Logger = None,
            verbose: int = 0,
    ):
        super().__init__(1., logger, verbose)
        psi = psi if isinstance(psi, ClassFunction) else get_class_function(psi)
        self.psi = psi.clipped() if psi.kind == 'user' else psi
        self.params = BoundParams(alpha=1.) if params is None else params
        if weights is None:
            weights = build_blocking_weights(self.psi, k_max, k_norm, multipliers)
        self.weights = weights
        self.k_max = weights.k_max
        assert k_min >= 1
        self.k_min = int(k_min)
        self.ks = np.arange(1, self.k_max + 1)
        self.gamma = np.asarray(self.psi(self.ks), dtype=float) / np.sqrt(self.ks)
        cash = weights.cash
        self.bank = AccountBank(self.gamma, np.log(weights.p), self.params.delta,
                                log_cash=float(np.log(cash)) if cash > 0 else -np.inf)
        self._logger.info(f'validity mixture over {self.k_max} accounts for {self.psi.name}, cash {cash:.3g}')

    @property
    def cash(self) -> float:
        return self.weights.cash

    @property
    def log_capital(self) -> float:
        return self.bank.log_capital

    def fraction(self, state: GameState, c: float) -> float:
        frozen = self.bank.n_frozen
        fraction = self.bank.fraction(c)
        if self.bank.n_frozen > frozen:
            self._logger.debug(f'round {state.n + 1}: {self.bank.n_frozen - frozen} accounts froze at c={c}')
            if self.bank.all_frozen:
                self._logger.info(f'round {state.n + 1}: all accounts frozen')
        return fraction

    def observe(self, event: PathEvent, state: GameState):
        self.bank.step(event.x, event.c)

    def bound_records(self, state: GameState) -> Iterable[BoundRecord]:
        records = [r for r in validity_certificate(self, state, self.params) if r.applicable]
        for r in records:
            if r.violated and r.case_id == EXPECTED_ASYMPTOTIC:
                self._logger.debug(f'round {state.n}: {r.bound_id} fails in window k={r.k} below k_min={self.k_min}, '
                                   f'expected-asymptotic')
        return records


def validity_bet(m: ValidityMixture, state: GameState, c_next: float) -> float:
    """Total bet sum_k p_k M^(k) of the mixture for the upcoming round; accounts with gamma_k c_next > delta freeze."""
    return m.bet(state, c_next)


def is_hitting_round(state: GameState, psi: ClassFunction) -> bool:
    return state.A2 > 0 and state.S >= state.A * psi(state.A2)


def certificate_window(state: GameState, psi: ClassFunction):
    """Accounts k_lo..k_hi = floor(A^2 - A^2/psi(A^2))..floor(A^2) that carry the certificate."""
    A2 = state.A2
    return int(np.floor(A2 - A2 / psi(A2))), int(np.floor(A2))


def validity_certificate(m: ValidityMixture, state: GameState, params: Optional[BoundParams] = None) -> BoundReport:
    r"""
    Evaluates the lower-bound chain for :math:`Z \mathcal{K}_n` at a hitting round :math:`S_n \ge A_n \psi(A_n^2)`.

    For the accounts k in the window :math:`[A^2 - A^2/\psi(A^2), A^2]`, the chain consists of

    * 'exponent': :math:`\gamma_k S - \gamma_k^2 A^2/2 - \psi(k)^2/2 \ge -1/2 - 2\delta`,
    * 'deltaconst': :math:`\gamma_k^3 A^2 \bar c \le C (1+\delta)^4`,
    * 'psi-doubling': :math:`\psi(A^2) \le 2 \psi(k)`,
    * 'bar-c': :math:`\bar c_n \le (1+\delta) C A_n / \psi(A_n^2)^3`,
    * 'keep-open': :math:`\gamma_k \bar c_n \le \delta`,
    * 'final': :math:`\ln Z\mathcal{K}_n \ge \ln(a_{k_{lo}} (1/2 - \psi(A^2)/(2A^2))) - 1/2 - 2\delta - C(1+\delta)^4`.

    All of them rest on hypotheses for large n, so the records are not strict, and windows starting below
    `m.k_min` are tagged as expected-asymptotic. At rounds that are not hitting rounds, or whose window is not
    materialized, a single not-applicable record is returned.
    """
    params = m.params if params is None else params
    n, psi = state.n, m.psi
    report = BoundReport()
    if not is_hitting_round(state, psi):
        report.add(BoundRecord.not_applicable(n, 'validity-certificate'))
        return report
    k_lo, k_hi = certificate_window(state, psi)
    if k_lo < 1 or k_hi > m.k_max:
        report.add(BoundRecord.not_applicable(n, 'validity-certificate', 'window-not-materialized'))
        return report

    delta, C = params.delta, params.C
    S, A2, cbar = state.S, state.A2, state.cbar
    psi_A2 = psi(A2)
    window = slice(k_lo - 1, k_hi)
    gamma = m.gamma[window]
    psi_k = np.asarray(psi(m.ks[window]), dtype=float)

    exponent = gamma * S - gamma ** 2 * A2 / 2 - psi_k ** 2 / 2
    worst = int(np.argmin(exponent))
    records: List[BoundRecord] = [
        BoundRecord(n, 'exponent', 'window-min', -0.5 - 2 * delta, float(exponent[worst]), log_domain=True,
                    strict=False, k=k_lo + worst),
        BoundRecord(n, 'deltaconst', 'window-max', float(np.max(gamma ** 3 * A2 * cbar)), C * (1 + delta) ** 4,
                    strict=False, k=k_lo),
        BoundRecord(n, 'psi-doubling', 'window-min', float(psi_A2), float(2 * np.min(psi_k)), strict=False, k=k_lo),
        bar_c_bound(n, cbar, A2, C, psi, delta),
        BoundRecord(n, 'keep-open', 'window-max', float(np.max(gamma) * cbar), delta, strict=False, k=k_lo),
    ]
    factor = 0.5 - psi_A2 / (2 * A2)
    if factor > 0:
        lower = float(np.log(m.weights.a[k_lo - 1] * factor) - 0.5 - 2 * delta - C * (1 + delta) ** 4)
        records.append(BoundRecord(n, 'final', 'hitting', lower, float(np.log(m.weights.Z) + m.log_capital),
                                   log_domain=True, strict=False, k=k_lo))
    else:
        records.append(BoundRecord.not_applicable(n, 'final'))
    if k_lo < m.k_min:
        records = [replace(r, case_id=EXPECTED_ASYMPTOTIC) if r.applicable else r for r in records]
    report.extend(records)
    return report
