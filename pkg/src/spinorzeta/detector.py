"""Fejer-kernel detector for large partial sums and short-interval sign counts.

The detector integrates the normalised partial sum

    Phi(v) = (2 pi)^{3/4} S_F(v^4) / v^{3/2}

against ``K_tau(u) = (1 - |u|)(1 + tau cos(c kappa u))`` over ``v = t + kappa u``.
``Phi`` jumps wherever ``v^4`` is an integer, so ``[-1, 1]`` is split at
every jump preimage and each smooth piece gets 8-point Gauss-Legendre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coeffs import CoeffTable, _band
from .errors import AccuracyError, TableTooSmallError, ValidationError
from .voronoi import PHASE_CONSTANT, PHASE_SHIFT

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
PHI_SCALE = (2.0 * math.pi) ** 0.75
DEFAULT_KAPPA = 12.0
DEFAULT_WINDOW_C = 3.0
DEFAULT_EPS = 0.05
DEFAULT_PANEL_BUDGET = 20_000_000


@dataclass(frozen=True)
class KernelTest:
    t: float
    kappa: float
    tau: int
    J: float
    expected: float
    deviation: float
    n_panels: int = 0


@dataclass(frozen=True)
class ExtremaReport:
    X: float
    C: float
    x1: float
    x2: float
    S1: float
    S2: float
    c1_emp: float
    c2_emp: float

    @property
    def lemma_holds(self) -> bool:
        """Whether the window shows ``S(x1) > 0 > S(x2)``."""
        return self.S1 > 0 > self.S2


@dataclass(frozen=True)
class WindowScan:
    x: float
    c: float
    window: tuple[float, float]
    plus_count: int
    minus_count: int
    zero_count: int
    lower_target: float

    @property
    def plus(self) -> int:
        return self.plus_count

    @property
    def minus(self) -> int:
        return self.minus_count

    @property
    def zero(self) -> int:
        return self.zero_count

    @property
    def meets_target(self) -> bool:
        return min(self.plus_count, self.minus_count) >= self.lower_target


@dataclass(frozen=True)
class SignChangeTriple:
    """Points ``x1 < x2 < x3`` with ``S`` alternating low/high/low, plus the one-signed sums between them."""

    x: float
    points: tuple[float, float, float]
    values: tuple[float, float, float]
    positive_mass: float  # sum of a(n) > 0 over x1 < n <= x2
    negative_mass: float  # sum of -a(n) over a(n) < 0, x2 < n <= x3
    plus_count: int
    minus_count: int

    @property
    def alternating(self) -> bool:
        s1, s2, s3 = self.values
        return s1 < 0 < s2 and s3 < 0


def _check_tau(tau: int) -> None:
    if tau not in (1, -1):
        raise ValidationError(f"tau must be +1 or -1, got {tau}")


def kernel(u, kappa: float, tau: int, c_osc: float = PHASE_CONSTANT):
    """``K_tau(u) = (1 - |u|)(1 + tau cos(c_osc kappa u))`` on ``[-1, 1]``."""
    _check_tau(tau)
    arr = np.asarray(u, dtype=np.float64)
    if np.any(np.abs(arr) > 1):
        raise ValidationError("kernel is defined on -1 <= u <= 1")
    val = (1 - np.abs(arr)) * (1 + tau * np.cos(c_osc * kappa * arr))
    return float(val) if np.ndim(val) == 0 else val


def fejer_mass(kappa: float, tau: int, c_osc: float = PHASE_CONSTANT) -> float:
    """Closed form of ``int_{-1}^{1} K_tau``: ``1 + tau (sin(c/2)/(c/2))^2`` with ``c = c_osc kappa``."""
    _check_tau(tau)
    h = c_osc * kappa / 2
    return 1 + tau * (math.sin(h) / h) ** 2


def kernel_mass_bracket(kappa: float) -> tuple[float, float]:
    """Bracket ``[1 - (3 pi kappa)^{-2}, 2]`` quoted for the kernel mass.

    It is not valid for every kappa when ``tau = -1``; compare with
    :func:`fejer_mass`.
    """
    return 1 - (3 * math.pi * kappa) ** -2, 2.0


def phase_matched_t(t0: float, c_osc: float = PHASE_CONSTANT) -> float:
    """Nearest ``t`` to ``t0`` with ``c_osc t + pi/4`` a multiple of ``2 pi``."""
    m = round((c_osc * t0 + PHASE_SHIFT) / (2 * math.pi))
    return (2 * math.pi * m - PHASE_SHIFT) / c_osc


def phi(table: CoeffTable, v):
    """``(2 pi)^{3/4} S_F(v^4) / v^{3/2}``; vectorised over ``v``."""
    arr = np.asarray(v, dtype=np.float64)
    if np.any(arr <= 0):
        raise ValidationError("v must be positive")
    v4 = arr**4
    if np.any(v4 > table.N):
        raise TableTooSmallError(f"v^4 = {float(np.max(v4))} exceeds table bound N={table.N}")
    idx = np.floor(v4).astype(np.int64)
    val = PHI_SCALE * np.asarray(table.prefix_a, dtype=np.float64)[idx] / arr**1.5
    return float(val) if np.ndim(val) == 0 else val


def _gl_integrate(edges: np.ndarray, f_nodes: Callable[[np.ndarray, np.ndarray], np.ndarray],
                  chunk: int = 1 << 18) -> float:
    """Sum of 8-point Gauss-Legendre over consecutive panels ``[edges[i], edges[i+1]]``.

    ``f_nodes(nodes, panel_index)`` evaluates the integrand at an
    ``(n_panels, 8)`` node array.
    """
    total = []
    for lo in range(0, len(edges) - 1, chunk):
        left = edges[lo : lo + chunk + 1][:-1]
        right = edges[lo + 1 : lo + chunk + 1]
        mid, half = (left + right) / 2, (right - left) / 2
        nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
        vals = f_nodes(nodes, np.arange(lo, lo + len(left)))
        total.append(float(np.sum((vals * _GL_W[None, :]).sum(axis=1) * half)))
    return math.fsum(total)


def _base_edges(n_panels: int, freq: float) -> np.ndarray:
    # at most ~1 radian of the fastest oscillation per panel, split at the kink u = 0
    n = max(n_panels, int(math.ceil(2 * freq)))
    half = max(1, (n + 1) // 2)
    return np.concatenate([np.linspace(-1.0, 0.0, half + 1), np.linspace(0.0, 1.0, half + 1)[1:]])


def j_tau(
    table: CoeffTable | None,
    t: float,
    kappa: float = DEFAULT_KAPPA,
    tau: int = 1,
    n_quad: int = 1000,
    phi_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    c_osc: float = PHASE_CONSTANT,
    budget: int = DEFAULT_PANEL_BUDGET,
) -> KernelTest:
    """``J_tau = int_{-1}^{1} Phi(t + kappa u) K_tau(u) du``.

    ``phi_fn`` replaces ``Phi`` (as a function of ``v``); the table is then
    not consulted and no jump splitting happens.
    """
    _check_tau(tau)
    if not kappa > 1:
        raise ValidationError("kappa must exceed 1")
    if not t > 2 * kappa:
        raise ValidationError(f"need t > 2 kappa (t={t}, kappa={kappa})")
    if n_quad < 1000:
        raise ValidationError("n_quad must be at least 1000")
    edges = _base_edges(n_quad, c_osc * kappa)
    if phi_fn is None:
        if table is None:
            raise ValidationError("need a coefficient table or phi_fn")
        hi = (t + kappa) ** 4
        if hi > table.N:
            raise TableTooSmallError(f"(t + kappa)^4 = {hi:.6g} exceeds table bound N={table.N}")
        lo = (t - kappa) ** 4
        m_lo, m_hi = int(math.floor(lo)) + 1, int(math.ceil(hi)) - 1
        n_jumps = max(0, m_hi - m_lo + 1)
        if n_jumps + len(edges) > budget:
            raise AccuracyError(
                f"{n_jumps} jumps of Phi in the window exceed the panel budget {budget}"
            )
        m = np.arange(m_lo, m_hi + 1, dtype=np.float64)
        jumps = (m**0.25 - t) / kappa
        edges = np.union1d(edges, jumps[(jumps > -1) & (jumps < 1)])
        prefix = np.asarray(table.prefix_a, dtype=np.float64)
        mids = t + kappa * (edges[:-1] + edges[1:]) / 2
        # one prefix value per panel, read at the panel midpoint
        panel_s = PHI_SCALE * prefix[np.floor(mids**4).astype(np.int64)]

        def integrand(u, idx):
            v = t + kappa * u
            return panel_s[idx][:, None] / v**1.5 * kernel(u, kappa, tau, c_osc)
    else:
        def integrand(u, idx):
            return np.asarray(phi_fn(t + kappa * u), dtype=np.float64) * kernel(u, kappa, tau, c_osc)

    J = _gl_integrate(edges, integrand)
    return KernelTest(float(t), float(kappa), tau, J, tau / 2, J - tau / 2, len(edges) - 1)


def r_s_beta(
    beta: float, t: float, kappa: float, tau: int, c_osc: float = PHASE_CONSTANT, n_panels: int = 1000
) -> tuple[float, float]:
    """The two frequency-``beta`` kernel integrals.

    ``r = int K_tau(u) cos(c_osc beta (t + kappa u) + pi/4) du`` and
    ``s = int K_tau(u) sin(c_osc beta (t + kappa u) + pi/4) / (t + kappa u) du``.
    """
    _check_tau(tau)
    if not beta > 0:
        raise ValidationError("beta must be positive")
    # t > kappa keeps t + kappa u away from 0; the sweep grid needs (t, kappa) = (50, 32)
    if not t > kappa:
        raise ValidationError(f"need t > kappa (t={t}, kappa={kappa})")
    edges = _base_edges(n_panels, c_osc * kappa * (beta + 1))

    def phase(u):
        return c_osc * beta * (t + kappa * u) + PHASE_SHIFT

    r = _gl_integrate(edges, lambda u, _: kernel(u, kappa, tau, c_osc) * np.cos(phase(u)))
    s = _gl_integrate(
        edges, lambda u, _: kernel(u, kappa, tau, c_osc) * np.sin(phase(u)) / (t + kappa * u)
    )
    return r, s


def _window_end(x: float, c: float) -> float:
    return x + c * x**0.75


def find_extrema(table: CoeffTable, X: float, C: float = DEFAULT_WINDOW_C) -> ExtremaReport:
    """Largest and smallest ``S_F`` over ``[X, X + C X^{3/4}]``.

    ``S_F`` only changes at integers, so the candidates are ``X`` and the
    integers in ``(X, X + C X^{3/4}]``; ties go to the leftmost point.
    """
    if C < 0 or X < 1:
        raise ValidationError("need X >= 1 and C >= 0")
    end = _window_end(X, C)
    if end > table.N:
        raise TableTooSmallError(f"window end {end:.6g} exceeds table bound N={table.N}")
    first = int(math.floor(X)) + 1
    last = int(math.floor(end))
    pts = np.concatenate([[X], np.arange(first, last + 1, dtype=np.float64)])
    prefix = np.asarray(table.prefix_a, dtype=np.float64)
    vals = prefix[np.floor(pts).astype(np.int64)]
    i1, i2 = int(np.argmax(vals)), int(np.argmin(vals))
    scale = X**0.375
    return ExtremaReport(float(X), float(C), float(pts[i1]), float(pts[i2]),
                         float(vals[i1]), float(vals[i2]),
                         float(vals[i1] / scale), float(-vals[i2] / scale))


def scan_window(
    table: CoeffTable,
    x: float,
    c: float = DEFAULT_WINDOW_C,
    eps: float = DEFAULT_EPS,
    zero_tol: float | None = None,
) -> WindowScan:
    """Sign counts of ``a_F(n)`` for ``x < n <= x + c x^{3/4}``."""
    if c < 0 or x < 1:
        raise ValidationError("need x >= 1 and c >= 0")
    end = _window_end(x, c)
    if end > table.N:
        raise TableTooSmallError(f"window end {end:.6g} exceeds table bound N={table.N}")
    lo, hi = int(math.floor(x)) + 1, int(math.floor(end))
    target = x ** (0.375 - eps)
    if hi < lo:
        return WindowScan(float(x), float(c), (float(x), end), 0, 0, 0, target)
    a = np.asarray(table.a[lo : hi + 1], dtype=np.float64)
    band = _band(table, lo, hi, zero_tol)
    plus = int(np.count_nonzero(a > band))
    minus = int(np.count_nonzero(a < -band))
    return WindowScan(float(x), float(c), (float(x), end), plus, minus, hi - lo + 1 - plus - minus, target)


def sign_change_triple(table: CoeffTable, x: float, C: float = DEFAULT_WINDOW_C) -> SignChangeTriple:
    """Chain three extrema windows: a minimum after ``x``, a maximum after it, then a minimum.

    Each window is ``[y, y + C y^{3/4}]`` starting at the previous point, so
    the three points stay inside ``[x, x + 3 C' x^{3/4}]`` for a slightly
    larger ``C'``.
    """
    r1 = find_extrema(table, x, C)
    x1, s1 = r1.x2, r1.S2
    r2 = find_extrema(table, x1, C)
    x2, s2 = r2.x1, r2.S1
    r3 = find_extrema(table, x2, C)
    x3, s3 = r3.x2, r3.S2
    a = np.asarray(table.a, dtype=np.float64)
    seg12 = a[int(math.floor(x1)) + 1 : int(math.floor(x2)) + 1]
    seg23 = a[int(math.floor(x2)) + 1 : int(math.floor(x3)) + 1]
    return SignChangeTriple(
        float(x), (x1, x2, x3), (s1, s2, s3),
        float(seg12[seg12 > 0].sum()), float(-seg23[seg23 < 0].sum()),
        int(np.count_nonzero(seg12 > 0)), int(np.count_nonzero(seg23 < 0)),
    )
