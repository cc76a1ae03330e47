"""
Records of analytic bounds evaluated along a game, their aggregation and the constants the bounds depend on.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import numpy as np

from .utils.class_functions import ClassFunction
from .utils.io import read_rows_csv, write_rows_csv

# initial capital of the uniform mixture over proportions u * gamma, u in [2/e, 1]
ALPHA = 1. - 2. / np.e

BOUND_TOLERANCE = 1e-9

# case id of records whose hypotheses are only expected to hold beyond a configured minimum index
EXPECTED_ASYMPTOTIC = 'expected-asymptotic'

BOUND_FIELDS = ('round', 'bound_id', 'case_id', 'k', 'lhs', 'rhs', 'slack', 'violated', 'strict', 'log_domain')


@dataclass(frozen=True)
class BoundRecord:
    """
    One evaluation of an inequality lhs <= rhs.

    Attributes
    ----------
    round : int
        Round index at which the bound was evaluated.
    bound_id : str
        Name of the inequality.
    case_id : str
        Case distinction of the inequality that was evaluated, if any.
    lhs, rhs : float
        Both sides of the inequality.
    log_domain : bool
        If True, both sides are logarithms and the tolerance is absolute, otherwise it is relative.
    strict : bool
        Strict records hold at every round by construction, so a violation indicates a defect. Non-strict records
        rest on hypotheses that only hold for sufficiently large k or n and are reported without being asserted.
    k : int, optional
        Cycle or account index the record refers to.
    applicable : bool
        False for placeholder records of rounds at which the bound does not apply.
    """
    round: int
    bound_id: str
    case_id: str
    lhs: float
    rhs: float
    log_domain: bool = False
    strict: bool = True
    k: Optional[int] = None
    applicable: bool = True
    tol: float = BOUND_TOLERANCE

    @classmethod
    def not_applicable(cls, n: int, bound_id: str, reason: str = 'not-applicable') -> 'BoundRecord':
        return cls(n, bound_id, reason, np.nan, np.nan, applicable=False)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def relative_slack(self) -> float:
        if self.log_domain:
            return self.slack
        scale = max(abs(self.lhs), abs(self.rhs))
        return self.slack / scale if scale > 0 else 0.

    @property
    def violated(self) -> bool:
        if not self.applicable:
            return False
        margin = self.tol if self.log_domain else self.tol * max(abs(self.lhs), abs(self.rhs))
        if np.isnan(margin):
            return True
        return not self.lhs <= self.rhs + margin

    @classmethod
    def from_row(cls, row: dict) -> 'BoundRecord':
        """Inverse of :meth:`as_row` for rows read back from a CSV file."""
        return cls(
            round=int(row['round']), bound_id=row['bound_id'], case_id=row['case_id'], lhs=float(row['lhs']),
            rhs=float(row['rhs']), log_domain=bool(int(row['log_domain'])), strict=bool(int(row['strict'])),
            k=int(row['k']) if row['k'] else None,
        )

    def as_row(self) -> dict:
        return {
            'round': self.round, 'bound_id': self.bound_id, 'case_id': self.case_id,
            'k': '' if self.k is None else self.k, 'lhs': self.lhs, 'rhs': self.rhs, 'slack': self.slack,
            'violated': int(self.violated), 'strict': int(self.strict), 'log_domain': int(self.log_domain),
        }


class BoundReport:
    """An ordered collection of :class:`BoundRecord` instances with per-bound aggregation."""

    def __init__(self, records: Iterable[BoundRecord] = ()):
        self.records: List[BoundRecord] = list(records)

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def add(self, record: BoundRecord):
        self.records.append(record)

    def extend(self, records: Iterable[BoundRecord]):
        self.records.extend(records)

    def select(self, bound_id: str, applicable_only: bool = True) -> List[BoundRecord]:
        return [r for r in self.records if r.bound_id == bound_id and (r.applicable or not applicable_only)]

    def violations(self, strict_only: bool = True) -> List[BoundRecord]:
        return [r for r in self.records if r.violated and (r.strict or not strict_only)]

    @property
    def ok(self) -> bool:
        return not self.violations()

    def summary(self) -> Dict[str, dict]:
        """
        Per bound id: number of applicable evaluations, violations split by strictness and the worst slack.
        Violations of records tagged as expected-asymptotic are counted separately and do not enter the slack.
        """
        summary = defaultdict(lambda: {'checked': 0, 'violations': 0, 'non_strict_violations': 0,
                                       'expected_asymptotic': 0, 'worst_relative_slack': np.inf})
        for r in self.records:
            if not r.applicable:
                continue
            entry = summary[r.bound_id]
            entry['checked'] += 1
            if r.case_id == EXPECTED_ASYMPTOTIC:
                entry['expected_asymptotic'] += int(r.violated)
                continue
            if r.violated:
                entry['violations' if r.strict else 'non_strict_violations'] += 1
            entry['worst_relative_slack'] = min(entry['worst_relative_slack'], r.relative_slack)
        return dict(summary)

    def to_csv(self, path: Union[str, Path]):
        write_rows_csv(path, BOUND_FIELDS, (r.as_row() for r in self.records if r.applicable))

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> 'BoundReport':
        return cls(BoundRecord.from_row(row) for row in read_rows_csv(path))


def verify_all_bounds(source, logger: Optional[logging.Logger] = None) -> dict:
    """
    Aggregates the bound records of a trajectory (or a report, or any iterable of records).

    Returns
    -------
    dict
        Per-bound statistics under 'bounds' plus the total numbers of strict and non-strict violations and the
        worst relative slack over all strict records.
    """
    logger = logger if logger is not None else logging.getLogger('verify_all_bounds')
    report = getattr(source, 'bounds', source)
    if not isinstance(report, BoundReport):
        report = BoundReport(report)
    per_bound = report.summary()
    strict_slacks = [r.relative_slack for r in report if r.applicable and r.strict]
    for r in report.violations():
        logger.warning(f'bound {r.bound_id} ({r.case_id}) violated at round {r.round}: {r.lhs} > {r.rhs}')
    return {
        'bounds': per_bound,
        'violations': sum(v['violations'] for v in per_bound.values()),
        'non_strict_violations': sum(v['non_strict_violations'] for v in per_bound.values()),
        'expected_asymptotic': sum(v['expected_asymptotic'] for v in per_bound.values()),
        'worst_relative_slack': min(strict_slacks) if strict_slacks else None,
    }


def log_c1(r: float) -> float:
    """Logarithm of the constant bounding the buy/sell process where S is far from gamma A^2; `r` = gamma^3 A^2 c-bar."""
    e = np.e
    return float(np.log(2.) + r + (2 * e - 1) * ((1 + e ** 3) * r + np.log(2.)) / (e - 1) ** 2)


@dataclass(frozen=True)
class BoundParams:
    """
    Constants shared by the bound checks.

    Parameters
    ----------
    delta : float, default = 0.01
        Freezing threshold: an account with proportion gamma stops betting once gamma * c > delta.
    C : float, default = 1
        Constant of the path class Omega_C.
    alpha : float, default = 1 - 2/e
        Initial capital of the mixture processes.
    D_override : float, optional
        Replaces the literal scaling constant D of the cycle process Y. The literal value is astronomically large,
        which makes Y numerically constant.
    """
    delta: float = 0.01
    C: float = 1.
    alpha: float = ALPHA
    D_override: Optional[float] = None
    tol: float = BOUND_TOLERANCE

    def __post_init__(self):
        assert 0 < self.delta < 1
        assert self.C > 0
        assert self.alpha > 0
        assert self.D_override is None or self.D_override > 0

    @property
    def c1(self) -> float:
        return 9. / (1. + 2. * self.delta) ** 2

    @property
    def remainder_const(self) -> float:
        """Bound on (gamma_k e^-w)^3 A^2 c-bar of the open cycle accounts."""
        return (1. + self.delta) ** 5 * self.C * np.e ** 6

    @property
    def log_C1bar(self) -> float:
        return log_c1(self.remainder_const)

    @property
    def log_D(self) -> float:
        if self.D_override is not None:
            return float(np.log(self.D_override))
        return float(np.logaddexp(np.log(24 * np.sqrt(2 * np.pi)) + self.remainder_const,
                                  np.log(4.) + self.log_C1bar) - np.log(self.alpha))


def bar_c_bound(n: int, cbar: float, A2: float, C: float, psi: ClassFunction, delta: float) -> BoundRecord:
    """c-bar_n <= (1+delta) C A_n / psi(A_n^2)^3, which holds for large n on Omega_C paths."""
    if A2 <= 0:
        return BoundRecord.not_applicable(n, 'bar-c')
    rhs = (1 + delta) * C * np.sqrt(A2) / psi(A2) ** 3
    return BoundRecord(n, 'bar-c', 'omega-C', cbar, float(rhs), strict=False)

