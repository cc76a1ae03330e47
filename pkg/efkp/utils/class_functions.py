"""
Iterated logarithms, upper- and lower-class functions, the integral test and the mixture weights derived from it.

Class functions are evaluated through u = ln(lambda) (:meth:`ClassFunction.of_log`) or v = ln(ln(lambda))
(:meth:`ClassFunction.of_loglog`), so that arguments such as the cycle thresholds k^(5k) never have to be
materialized as floats.
"""

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad, IntegrationWarning

from ..exceptions import BlockingError, DomainError, QuadratureError

DEFAULT_THRESHOLD = 16.

_LOWER_COEF = 3.
_UPPER_COEF = 4.

# location at which the decay of the doubly-logarithmic tail integrand is measured
_TAIL_POINT = 1e6


def _as_output(value: np.ndarray):
    return float(value) if np.ndim(value) == 0 else value


def iter_log(k: int, n: float) -> float:
    """
    Applies the natural logarithm `k` times to `n`.

    Parameters
    ----------
    k : int
        Number of applications, k >= 1.
    n : float
        Argument.

    Returns
    -------
    float
        ln_k(n).

    Raises
    ------
    DomainError
        If any intermediate value is non-positive.
    """
    assert k >= 1
    value = float(n)
    for step in range(k):
        if not value > 0:
            raise DomainError(f'ln_{k}({n}) is undefined: argument of logarithm #{step + 1} is {value}')
        value = float(np.log(value))
    return value


def _closed_form(n, coef: float):
    n = np.asarray(n, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        v = np.log(np.log(n))
        radicand = 2 * v + coef * np.log(v)
    if not np.all(radicand > 0):
        raise DomainError(f'class function with coefficient {coef} undefined at {n[~(radicand > 0)]}')
    return _as_output(np.sqrt(radicand))


def psi_lower(n):
    """Lower-class function sqrt(2 ln_2 n + 3 ln_3 n). Raises :class:`DomainError` where the radicand is not positive."""
    return _closed_form(n, _LOWER_COEF)


def psi_upper(n):
    """Upper-class function sqrt(2 ln_2 n + 4 ln_3 n). Raises :class:`DomainError` where the radicand is not positive."""
    return _closed_form(n, _UPPER_COEF)


def _builtin_loglog(coef: float) -> Callable[[np.ndarray], np.ndarray]:
    def evaluate(v: np.ndarray) -> np.ndarray:
        return np.sqrt(2 * v + coef * np.log(v))
    return evaluate


class ClassFunction:
    r"""
    A positive non-decreasing function :math:`\psi` used as boundary :math:`S_n \le A_n \psi(A_n^2)`.

    Parameters
    ----------
    log_eval : Callable[[np.ndarray], np.ndarray]
        Evaluates :math:`\psi` as a function of :math:`u = \ln \lambda`.
    loglog_eval : Callable[[np.ndarray], np.ndarray]
        Evaluates :math:`\psi` as a function of :math:`v = \ln \ln \lambda`.
    kind : {'builtin-upper', 'builtin-lower', 'user', 'clipped-user'}
        Origin of the function.
    name : str, default = None
        Human readable name used in logs and output files.
    threshold : float, default = 16
        Builtin and clipped functions are extended by the constant :math:`\psi(\mathrm{threshold})` below the
        threshold, which keeps them positive and non-decreasing on :math:`[0, \infty)`.

    Notes
    -----
    Use the factory methods :meth:`upper`, :meth:`lower`, :meth:`constant`, :meth:`from_callable` and
    :meth:`from_grid` rather than the constructor.
    """
    KINDS = ('builtin-upper', 'builtin-lower', 'user', 'clipped-user')

    def __init__(
            self,
            log_eval: Callable[[np.ndarray], np.ndarray],
            loglog_eval: Callable[[np.ndarray], np.ndarray],
            kind: str,
            name: Optional[str] = None,
            threshold: float = DEFAULT_THRESHOLD,
    ):
        assert kind in self.KINDS
        # below e^e the upper function drops beneath the lower one
        assert threshold > np.exp(np.e)
        self._log_eval = log_eval
        self._loglog_eval = loglog_eval
        self.kind = kind
        self.name = name if name is not None else kind
        self.threshold = float(threshold)
        self._clamped = kind != 'user'
        self._u_min = float(np.log(self.threshold))
        self._v_min = float(np.log(self._u_min))

    def __repr__(self) -> str:
        return f'ClassFunction(name={self.name!r}, kind={self.kind!r}, threshold={self.threshold})'

    @classmethod
    def upper(cls, threshold: float = DEFAULT_THRESHOLD) -> 'ClassFunction':
        """The builtin upper-class function (convergent integral test)."""
        loglog = _builtin_loglog(_UPPER_COEF)
        return cls(lambda u: loglog(np.log(u)), loglog, 'builtin-upper', 'upper', threshold)

    @classmethod
    def lower(cls, threshold: float = DEFAULT_THRESHOLD) -> 'ClassFunction':
        """The builtin lower-class function (divergent integral test)."""
        loglog = _builtin_loglog(_LOWER_COEF)
        return cls(lambda u: loglog(np.log(u)), loglog, 'builtin-lower', 'lower', threshold)

    @classmethod
    def constant(cls, value: float) -> 'ClassFunction':
        assert value > 0
        return cls(lambda u: np.full_like(u, value, dtype=float), lambda v: np.full_like(v, value, dtype=float),
                   'user', f'constant({value})')

    @classmethod
    def from_callable(cls, func: Callable, log_domain: bool = False, name: str = 'user') -> 'ClassFunction':
        """
        Wraps a vectorized user function.

        Parameters
        ----------
        func : Callable
            Either lambda -> psi(lambda) or, if `log_domain` is True, u -> psi(exp(u)).
        log_domain : bool, default = False
            Whether `func` expects ln(lambda).
        name : str
            Name of the function.
        """
        def log_eval(u):
            if log_domain:
                return np.asarray(func(u), dtype=float)
            with np.errstate(over='ignore'):
                return np.asarray(func(np.exp(u)), dtype=float)

        def loglog_eval(v):
            with np.errstate(over='ignore'):
                return log_eval(np.exp(v))

        return cls(log_eval, loglog_eval, 'user', name)

    @classmethod
    def from_grid(cls, lam: Sequence[float], psi: Sequence[float], name: str = 'grid') -> 'ClassFunction':
        """
        Builds a class function from a tabulated monotone grid, interpolated linearly in ln(lambda) and
        extended by constants outside of the grid.
        """
        lam = np.asarray(lam, dtype=float)
        psi = np.asarray(psi, dtype=float)
        if lam.ndim != 1 or lam.shape != psi.shape or len(lam) < 2:
            raise ValueError('class function grid needs two equally long columns with at least two rows')
        if np.any(lam <= 0) or np.any(np.diff(lam) <= 0):
            raise ValueError('grid abscissae must be positive and strictly increasing')
        if np.any(psi <= 0) or np.any(np.diff(psi) < 0):
            raise ValueError('grid values must be positive and non-decreasing')
        ln_lam = np.log(lam)

        def log_eval(u):
            return np.interp(u, ln_lam, psi)

        def loglog_eval(v):
            with np.errstate(over='ignore'):
                return np.interp(np.exp(v), ln_lam, psi)

        return cls(log_eval, loglog_eval, 'user', name)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> 'ClassFunction':
        """Reads a two-column (lambda, psi) CSV file; a non-numeric first row is treated as header."""
        rows = []
        with open(path, newline='') as f:
            for row in csv.reader(f):
                if not row:
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    if rows:
                        raise
        lam, psi = zip(*rows)
        return cls.from_grid(lam, psi, name=Path(path).stem)

    def clipped(self, threshold: Optional[float] = None) -> 'ClassFunction':
        """
        Returns max(psi_lower, min(psi_upper, psi)) above the threshold, extended by its value at the threshold
        below.
        """
        threshold = self.threshold if threshold is None else threshold
        lower, upper = _builtin_loglog(_LOWER_COEF), _builtin_loglog(_UPPER_COEF)
        base_log, base_loglog = self._log_eval, self._loglog_eval

        def log_eval(u):
            v = np.log(u)
            return np.clip(base_log(u), lower(v), upper(v))

        def loglog_eval(v):
            return np.clip(base_loglog(v), lower(v), upper(v))

        return ClassFunction(log_eval, loglog_eval, 'clipped-user', f'clipped({self.name})', threshold)

    def of_log(self, u):
        """psi(exp(u))."""
        u = np.asarray(u, dtype=float)
        if self._clamped:
            u = np.maximum(u, self._u_min)
        return _as_output(self._log_eval(u))

    def of_loglog(self, v):
        """psi(exp(exp(v)))."""
        v = np.asarray(v, dtype=float)
        if self._clamped:
            v = np.maximum(v, self._v_min)
        return _as_output(self._loglog_eval(v))

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        with np.errstate(divide='ignore'):
            return self.of_log(np.log(lam))

    def check_contract(self, lo: float, hi: float, num: int = 1000) -> bool:
        """Spot-checks positivity and monotonicity on `num` log-spaced points in [lo, hi]."""
        assert 0 < lo < hi
        values = np.atleast_1d(self.of_log(np.linspace(np.log(lo), np.log(hi), num)))
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            return False
        return bool(np.all(np.diff(values) >= -1e-12 * values[1:]))


def get_class_function(spec: str, threshold: float = DEFAULT_THRESHOLD, clip: bool = False) -> ClassFunction:
    """Resolves 'upper', 'lower' or the path of a (lambda, psi) CSV grid."""
    if spec == 'upper':
        return ClassFunction.upper(threshold)
    if spec == 'lower':
        return ClassFunction.lower(threshold)
    if Path(spec).is_file():
        psi = ClassFunction.from_csv(spec)
        return psi.clipped(threshold) if clip else psi
    raise ValueError(f'unknown class function: {spec}')


def integrand(psi_values):
    """psi * exp(-psi^2 / 2)."""
    psi_values = np.asarray(psi_values, dtype=float)
    return _as_output(psi_values * np.exp(-psi_values ** 2 / 2))


class IntegralResult(NamedTuple):
    value: float
    error: float


def _quad(func: Callable, a: float, b: float, epsrel: float, limit: int) -> IntegralResult:
    with warnings.catch_warnings():
        warnings.simplefilter('error', IntegrationWarning)
        try:
            value, error = quad(func, a, b, epsabs=1e-14, epsrel=epsrel, limit=limit)
        except IntegrationWarning as w:
            raise QuadratureError(f'quadrature on [{a}, {b}] did not converge: {w}') from w
    if not np.isfinite(value):
        raise QuadratureError(f'quadrature on [{a}, {b}] returned {value}')
    return IntegralResult(float(value), float(error))


def _loglog_integrand(psi: ClassFunction, v: float) -> float:
    value = psi.of_loglog(v)
    return value * np.exp(v - value ** 2 / 2)


def _check_tail_decay(psi: ClassFunction):
    h1, h2 = _loglog_integrand(psi, _TAIL_POINT), _loglog_integrand(psi, 2 * _TAIL_POINT)
    if h1 == 0 and h2 == 0:
        return
    if not (np.isfinite(h1) and np.isfinite(h2)) or h2 == 0:
        raise QuadratureError(f'tail integrand of {psi.name} is not finite')
    # the tail in v = ln ln(lambda) converges iff the integrand decays faster than 1/v
    exponent = np.log2(h1 / h2)
    if exponent <= 1 + 1e-3:
        raise QuadratureError(f'integral of {psi.name} appears divergent (tail decays like v^-{exponent:.4f})')


def integral_I_log(
        psi: ClassFunction,
        u_lo: float,
        u_hi: float = np.inf,
        epsrel: float = 1e-8,
        limit: int = 500,
) -> IntegralResult:
    """
    Integral of psi(lambda) exp(-psi(lambda)^2/2) d(lambda)/lambda over [exp(u_lo), exp(u_hi)], computed in u = ln(lambda).

    For an infinite upper limit, the range beyond max(u_lo, e) is integrated in v = ln(u).
    """
    assert 0 <= u_lo < u_hi

    def in_u(u):
        return integrand(psi.of_log(u))

    if np.isfinite(u_hi):
        return _quad(in_u, u_lo, u_hi, epsrel, limit)

    u_split = max(u_lo, np.e)
    head = _quad(in_u, u_lo, u_split, epsrel, limit) if u_split > u_lo else IntegralResult(0., 0.)
    tail = integral_I_loglog(psi, float(np.log(u_split)), np.inf, epsrel, limit)
    return IntegralResult(head.value + tail.value, head.error + tail.error)


def integral_I_loglog(
        psi: ClassFunction,
        v_lo: float,
        v_hi: float = np.inf,
        epsrel: float = 1e-8,
        limit: int = 500,
) -> IntegralResult:
    """The integral of :func:`integral_I_log` over v = ln(ln(lambda)) in [v_lo, v_hi]."""
    assert v_lo < v_hi
    if not np.isfinite(v_hi):
        _check_tail_decay(psi)
    return _quad(lambda v: _loglog_integrand(psi, v), v_lo, v_hi, epsrel, limit)


def integral_I(psi: ClassFunction, lo: float, hi: float = np.inf, **kwargs) -> IntegralResult:
    """
    Adaptive-quadrature value of the integral test over [lo, hi] with an error estimate.

    Parameters
    ----------
    psi : ClassFunction
        The class function.
    lo, hi : float
        Integration limits in lambda, 1 <= lo < hi (hi may be infinite).

    Raises
    ------
    QuadratureError
        If the quadrature does not converge or the (infinite) integral appears divergent.
    """
    assert 1 <= lo < hi
    return integral_I_log(psi, float(np.log(lo)), float(np.log(hi)), **kwargs)


def criterion_terms(psi: ClassFunction, ks) -> np.ndarray:
    """Terms psi(k) exp(-psi(k)^2/2) / k of the discretized integral test."""
    ks = np.asarray(ks, dtype=float)
    return integrand(psi(ks)) / ks


def sum_criterion(psi: ClassFunction, k_lo: int, k_hi: int) -> float:
    """Sum of the discretized integral test over k_lo <= k <= k_hi."""
    assert 1 <= k_lo <= k_hi
    return float(np.sum(criterion_terms(psi, np.arange(k_lo, k_hi + 1))))


def block_multipliers(terms: Sequence[float], tail: float = 0.) -> np.ndarray:
    """
    Multipliers a_k obtained by splitting a convergent series into blocks of sum at most 2^-j and multiplying the
    j-th block by j.

    Term k belongs to block j iff its remainder R_k = tail + sum_{i >= k} t_i lies in (2^-j, 2^-j+1].

    Parameters
    ----------
    terms : Sequence[float]
        The materialized non-negative terms t_1, ..., t_K.
    tail : float, default = 0
        Upper estimate of sum_{i > K} t_i.

    Returns
    -------
    np.ndarray
        Non-decreasing multipliers a_1, ..., a_K (at least 1).
    """
    terms = np.asarray(terms, dtype=float)
    if np.any(terms < 0) or not np.all(np.isfinite(terms)) or not (np.isfinite(tail) and tail >= 0):
        raise BlockingError('blocking requires finite non-negative terms and tail')
    remainders = np.cumsum(np.concatenate([[tail], terms[::-1]]))[1:][::-1]
    if np.any(remainders <= 0):
        raise BlockingError('remainders of the series vanish, blocks cannot be formed')
    return np.maximum(1. + np.floor(np.log2(1. / remainders)), 1.)


@dataclass(frozen=True)
class MixtureWeights:
    """
    Weights p_k = a_k t_k / Z of the validity mixture.

    Attributes
    ----------
    a : np.ndarray
        Multipliers a_1..a_{k_norm}.
    terms : np.ndarray
        Series terms t_1..t_{k_norm}.
    p : np.ndarray
        Account weights p_1..p_{k_max}.
    Z : float
        Normalizer, sum of a_k t_k over the normalization range.
    tail : float
        Integral estimate of the series remainder beyond the normalization range.
    """
    a: np.ndarray
    terms: np.ndarray
    p: np.ndarray
    Z: float
    tail: float

    @property
    def k_max(self) -> int:
        return len(self.p)

    @property
    def k_norm(self) -> int:
        return len(self.a)

    @property
    def cash(self) -> float:
        """Weight of the accounts beyond k_max, which is held as cash."""
        return float(max(1. - np.sum(self.p), 0.))


def _check_multipliers(multipliers, k_norm: int) -> np.ndarray:
    if callable(multipliers):
        multipliers = multipliers(np.arange(1, k_norm + 1))
    a = np.asarray(multipliers, dtype=float)
    if len(a) < k_norm:
        raise ValueError(f'{len(a)} multipliers given, {k_norm} required')
    a = a[:k_norm]
    if np.any(a <= 0) or np.any(np.diff(a) < 0):
        raise ValueError('multipliers must be positive and non-decreasing')
    return a


def build_blocking_weights(
        psi: ClassFunction,
        k_max: int,
        k_norm: Optional[int] = None,
        multipliers: Union[None, Sequence[float], Callable] = None,
) -> MixtureWeights:
    """
    Builds the validity mixture weights from the blocked discretized integral test.

    Parameters
    ----------
    psi : ClassFunction
        Class function with convergent integral test.
    k_max : int
        Number of materialized accounts.
    k_norm : int, default = None
        Normalization horizon (at least k_max); defaults to 4 * k_max. Keeping it fixed while varying k_max
        leaves the weights of already materialized accounts unchanged.
    multipliers : array or callable, default = None
        User override for a_k; the blocking construction is used if None.

    Raises
    ------
    BlockingError
        If the series does not converge, e.g. for the lower-class function.
    """
    k_norm = 4 * k_max if k_norm is None else k_norm
    assert 1 <= k_max <= k_norm
    terms = criterion_terms(psi, np.arange(1, k_norm + 1))
    try:
        tail = integral_I(psi, k_norm).value
    except QuadratureError as e:
        raise BlockingError(f'{psi.name}: blocking weights need a convergent series ({e})') from e
    a = block_multipliers(terms, tail) if multipliers is None else _check_multipliers(multipliers, k_norm)
    Z = float(np.sum(a * terms))
    p = a[:k_max] * terms[:k_max] / Z
    return MixtureWeights(a=a, terms=terms, p=p, Z=Z, tail=tail)
