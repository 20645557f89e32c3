"""Truncated Voronoi main term, Perron-integral oracle and error-exponent fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .coeffs import CoeffTable
from .errors import AccuracyError, InsufficientDataError, TableTooSmallError, ValidationError
from .primes import prime_sieve
from .satake import EigenformData, spin_roots

#: Oscillation constant of the main term, ``4 sqrt(2 pi)``.
PHASE_CONSTANT = 4.0 * math.sqrt(2.0 * math.pi)
PHASE_SHIFT = math.pi / 4
AMPLITUDE = (2.0 * math.pi) ** -0.75


@dataclass(frozen=True)
class VoronoiEvaluation:
    x: float
    M: int
    exact: float
    main_term: float
    residual: float
    T: float


@dataclass(frozen=True)
class PerronConfig:
    T: float
    P: int
    kappa: float = 1.1
    step: float | None = None
    # Phase advance allowed per quadrature step at the worst frequency.
    max_phase_step: float = math.pi / 8

    def __post_init__(self):
        if not self.kappa > 1:
            raise ValidationError(f"kappa must exceed 1, got {self.kappa}")
        if not self.T > 0:
            raise ValidationError(f"T must be positive, got {self.T}")
        if self.P < 2:
            raise ValidationError(f"P must be >= 2, got {self.P}")


@dataclass(frozen=True)
class PerronComparison:
    x: float
    T: float
    P: int
    kappa: float
    perron: float
    direct: float
    deviation: float
    n_nodes: int
    est_error: float


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    stderr: float
    intercept: float
    r_squared: float
    n_points: int


def truncation_height(x: float, M: int) -> float:
    """``T`` with ``T^4 = 4 pi^2 (M + 1/2) x``."""
    return (4.0 * math.pi**2 * (M + 0.5) * x) ** 0.25


def _main_term_terms(a: np.ndarray, x: float, M: int, c_osc: float) -> np.ndarray:
    n = np.arange(1, M + 1, dtype=np.float64)
    return a[1 : M + 1] * n**-0.625 * np.cos(c_osc * (n * x) ** 0.25 + PHASE_SHIFT)


def main_term(
    t: CoeffTable, x: float, M: int, c_osc: float = PHASE_CONSTANT, descending: bool = False
) -> float:
    """``x^{3/8} (2 pi)^{-3/4} sum_{n <= M} a(n) n^{-5/8} cos(c_osc (n x)^{1/4} + pi/4)``.

    The sum is exactly rounded (``math.fsum``), so the result does not
    depend on the summation order; ``descending`` exists to check that.
    """
    if M > t.N:
        raise TableTooSmallError(f"M={M} exceeds table bound N={t.N}")
    if M <= 0:
        return 0.0
    terms = _main_term_terms(np.asarray(t.a, dtype=np.float64), x, M, c_osc)
    if descending:
        terms = terms[::-1]
    return x**0.375 * AMPLITUDE * math.fsum(terms)


def evaluate(t: CoeffTable, x: float, M: int, c_osc: float = PHASE_CONSTANT) -> VoronoiEvaluation:
    if math.floor(x) > t.N:
        raise TableTooSmallError(f"x={x} exceeds table bound N={t.N}")
    exact = t.partial_sum(x)
    mt = main_term(t, x, M, c_osc)
    return VoronoiEvaluation(x, M, exact, mt, exact - mt, truncation_height(x, M))


def parse_m_rule(rule: str) -> Callable[[float], int]:
    """``const:<int>`` or ``pow:<float>`` (``M = floor(x^e)``, at least 1)."""
    kind, _, arg = rule.partition(":")
    if kind == "const":
        m = int(arg)
        if m < 0:
            raise ValidationError("const M must be >= 0")
        return lambda x: m
    if kind == "pow":
        e = float(arg)
        return lambda x: max(1, int(math.floor(x**e)))
    raise ValidationError(f"unknown M-rule {rule!r}")


def evaluate_grid(t: CoeffTable, xs, M_rule, c_osc: float = PHASE_CONSTANT) -> list[VoronoiEvaluation]:
    if isinstance(M_rule, str):
        M_rule = parse_m_rule(M_rule)
    return [evaluate(t, float(x), M_rule(float(x)), c_osc) for x in xs]


def loglog_slope(xs, values) -> ExponentFit:
    """Least-squares slope of ``log|value|`` against ``log x``; zero values are dropped."""
    xs = np.asarray(xs, dtype=np.float64)
    v = np.abs(np.asarray(values, dtype=np.float64))
    keep = (v > 0) & np.isfinite(v) & (xs > 0)
    if keep.sum() < 4:
        raise InsufficientDataError(f"only {int(keep.sum())} usable points, need 4")
    lx, lv = np.log(xs[keep]), np.log(v[keep])
    if np.ptp(lx) == 0:
        raise InsufficientDataError("all x values coincide")
    res = stats.linregress(lx, lv)
    return ExponentFit(float(res.slope), float(res.stderr), float(res.intercept),
                       float(res.rvalue**2), int(keep.sum()))


def error_exponent_fit(t: CoeffTable, xs, M_rule, c_osc: float = PHASE_CONSTANT) -> ExponentFit:
    xs = list(xs)
    if len(xs) < 8:
        raise InsufficientDataError(f"need at least 8 x values, got {len(xs)}")
    evals = evaluate_grid(t, xs, M_rule, c_osc)
    return loglog_slope([e.x for e in evals], [e.residual for e in evals])


def i0_leading(tval: float, k: int) -> float:
    """Leading term ``(-1)^k (2 pi)^{-1/2} t^{3/8} cos(4 t^{1/4} + pi/4)`` of ``I_0(t)``."""
    if not tval > 0:
        raise ValidationError("t must be positive")
    return (-1) ** k * (2 * math.pi) ** -0.5 * tval**0.375 * math.cos(4 * tval**0.25 + math.pi / 4)


def _euler_arrays(F: EigenformData, P: int):
    ps = prime_sieve(P)
    F.check_coverage(P)
    e1 = np.array([float(F.locals[int(p)].e1) for p in ps])
    e2 = np.array([float(F.locals[int(p)].e2) for p in ps])
    return ps, e1, e2


def _log_derivative_bound(F: EigenformData, ps, kappa: float) -> float:
    # |Z'/Z(kappa + it)| <= sum_p sum_j |b_j| p^-k log p / (1 - |b_j| p^-k)
    total = 0.0
    for p in ps:
        lp = math.log(p)
        for b in spin_roots(F.locals[int(p)]).moduli():
            r = b * p**-kappa
            if r >= 1:
                raise ValidationError(f"Euler factor at {p} has a pole right of kappa={kappa}")
            total += r * lp / (1 - r)
    return total


def euler_product(F: EigenformData, s, P: int) -> np.ndarray:
    """``prod_{p <= P} 1/(1 - e1 y + e2 y^2 - e1 y^3 + y^4)`` with ``y = p^{-s}``."""
    ps, e1, e2 = _euler_arrays(F, P)
    s = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    return _euler_product(s, ps, e1, e2)


def _euler_product(s, ps, e1, e2, chunk: int = 8192):
    out = np.empty(len(s), dtype=np.complex128)
    logp = np.log(ps.astype(np.float64))
    for lo in range(0, len(s), chunk):
        y = np.exp(-np.outer(s[lo : lo + chunk], logp))
        q = (((y - e1) * y + e2) * y - e1) * y + 1
        out[lo : lo + chunk] = 1.0 / np.prod(q, axis=1)
    return out


def perron_oracle(F: EigenformData, x: float, cfg: PerronConfig, detail: bool = False):
    """``(1/2 pi) int_{-T}^{T} Z_P(kappa + it) x^{kappa + it} / (kappa + it) dt``.

    ``Z_P`` is the Euler product over primes ``<= cfg.P``.  The integrand is
    conjugate-symmetric, so only ``[0, T]`` is sampled (composite midpoint).
    Unless ``cfg.step`` is given, the step keeps the phase advance per node
    below ``cfg.max_phase_step``, using the bound
    ``|log x| + |Z'/Z| + 1/kappa`` on the phase speed.  The local error is
    estimated by comparing the even- and odd-indexed node sums.
    """
    if float(x).is_integer():
        raise ValidationError(f"x must not be an integer (got {x})")
    if x <= 0:
        raise ValidationError("x must be positive")
    ps, e1, e2 = _euler_arrays(F, cfg.P)
    if cfg.step is None:
        rate = abs(math.log(x)) + _log_derivative_bound(F, ps, cfg.kappa) + 1 / cfg.kappa
        h = cfg.max_phase_step / rate
    else:
        h = cfg.step
    n = max(2, int(math.ceil(cfg.T / h)))
    n += n % 2
    h = cfg.T / n
    tt = (np.arange(n) + 0.5) * h
    s = cfg.kappa + 1j * tt
    f = _euler_product(s, ps, e1, e2) * np.exp(s * math.log(x)) / s
    value = float((f.sum() * h).real / math.pi)
    even = float((f[0::2].sum() * 2 * h).real / math.pi)
    odd = float((f[1::2].sum() * 2 * h).real / math.pi)
    est = abs(even - odd)
    if est > 0.1 * max(abs(value), 1e-3):
        raise AccuracyError(
            f"Perron quadrature too coarse: step {h:.3g}, {n} nodes, "
            f"value {value:.6g}, even/odd disagreement {est:.3g}"
        )
    if detail:
        return value, n, est
    return value


def perron_compare(F: EigenformData, t: CoeffTable, x: float, cfg: PerronConfig) -> PerronComparison:
    value, n, est = perron_oracle(F, x, cfg, detail=True)
    direct = t.partial_sum(x)
    return PerronComparison(x, cfg.T, cfg.P, cfg.kappa, value, direct, abs(value - direct), n, est)
