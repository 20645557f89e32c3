"""Dense coefficient tables for the spinor zeta function.

``build_table`` expands the Euler product prime by prime: for each prime
``p`` the multiples of ``p`` are multiplied by the local coefficient at
``p^{v_p(n)}``.  Primes above ``sqrt(N)`` only contribute their first
coefficient and are handled in batches, so the whole construction is a
sequence of strided numpy updates of total length ``O(N log log N)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TableTooSmallError, ValidationError
from .primes import prime_sieve
from .satake import EigenformData, local_coeffs, local_lambda

DEFAULT_ZERO_REL_TOL = 1e-10
DEFAULT_RP_TOL = 1e-6


@dataclass(frozen=True)
class CoeffTable:
    """Arrays of length ``N + 1``; index ``n`` holds the value at ``n``, index 0 is 0."""

    N: int
    a: np.ndarray
    lam: np.ndarray
    d4: np.ndarray
    prefix_a: np.ndarray
    label: str = ""
    weight: int | None = None

    def partial_sum(self, x: float) -> float:
        """``S_F(x) = sum_{n <= x} a_F(n)``; a step function of ``x``."""
        if x < 1:
            return 0.0
        n = int(math.floor(x))
        if n > self.N:
            raise TableTooSmallError(f"x={x} exceeds table bound N={self.N}")
        return float(self.prefix_a[n])


@dataclass(frozen=True)
class SignCounts:
    x: float
    plus: int
    minus: int
    zero: int
    zero_tolerance: float
    # True when the zero band scales with d4(n)
    relative_tolerance: bool = False


def _d4_local(J: int) -> list[int]:
    return [math.comb(j + 3, 3) for j in range(J + 1)]


def _max_exponent(p: int, N: int) -> int:
    J, q = 0, 1
    while q * p <= N:
        q *= p
        J += 1
    return J


def _expand(N: int, primes, local_fn, large_c1, dtype) -> np.ndarray:
    """Multiply out ``prod_p c_p(v_p(n))`` for all ``n <= N``.

    ``local_fn(p, J)`` gives the coefficient list at ``p`` for primes with
    ``p^2 <= N``; ``large_c1`` holds the first coefficient for the rest.
    """
    out = np.ones(N + 1, dtype=dtype)
    out[0] = 0
    root = math.isqrt(N)
    small = primes[primes <= root]
    large = primes[primes > root]
    for p in small:
        p = int(p)
        J = _max_exponent(p, N)
        c = local_fn(p, J)
        sub = np.empty(N // p, dtype=dtype)
        sub[:] = c[1]
        step = p
        for j in range(2, J + 1):
            sub[step - 1 :: step] = c[j]
            step *= p
        out[p::p] *= sub
    if len(large):
        for k in range(1, N // int(large[0]) + 1):
            m = int(np.searchsorted(large, N // k, side="right"))
            if m == 0:
                break
            out[k * large[:m]] *= large_c1[:m]
    return out


def build_table(F: EigenformData, N: int, exact: bool = False) -> CoeffTable:
    """Expand the Euler product of ``F`` into ``a_F``, ``lambda_F`` and ``d_4`` up to ``N``.

    With ``exact=True`` (requires rational local data) the arrays hold
    Python ints/Fractions; otherwise float64.
    """
    if N < 1:
        raise ValidationError(f"table bound must be >= 1, got {N}")
    F.check_coverage(N)
    if exact and not F.is_exact:
        raise ValidationError("exact tables need rational (e1, e2) at every prime")
    dtype = object if exact else np.float64
    primes = prime_sieve(N)
    root = math.isqrt(N)
    large = primes[primes > root]

    def conv(vals):
        return list(vals) if exact else [float(v) for v in vals]

    large_e1 = np.array([F.locals[int(p)].e1 for p in large], dtype=dtype)
    a = _expand(N, primes, lambda p, J: conv(local_coeffs(F.locals[p], J)), large_e1, dtype)
    lam = _expand(N, primes, lambda p, J: conv(local_lambda(F.locals[p], J)), large_e1, dtype)
    d4 = _expand(
        N, primes, lambda p, J: _d4_local(J), np.full(len(large), 4, dtype=np.int64), np.int64
    )
    prefix = np.cumsum(a)
    if not exact:
        for arr in (a, lam, prefix):
            arr.setflags(write=False)
    d4.setflags(write=False)
    return CoeffTable(N, a, lam, d4, prefix, label=F.label, weight=F.weight)


def table_from_coefficients(a, weight: int | None = None, label: str = "") -> CoeffTable:
    """Wrap a raw coefficient array (``a[0]`` ignored) as a table.

    Used for synthetic or externally computed sequences; ``lam`` is derived
    from ``a`` by inverting ``a(n) = sum_{d^2 m = n} lam(m)/d`` and ``d4``
    is recomputed.
    """
    a = np.array(a, dtype=np.float64)
    a[0] = 0.0
    N = len(a) - 1
    if N < 1:
        raise ValidationError("need at least one coefficient")
    lam = a.copy()
    # lam = a * (sum_d mu(d)/d d^{-2s}) : subtract squares in increasing d
    mu = mobius(math.isqrt(N))
    for d in range(2, math.isqrt(N) + 1):
        if mu[d]:
            lam[d * d :: d * d] += (mu[d] / d) * a[1 : N // (d * d) + 1]
    primes = prime_sieve(N)
    root = math.isqrt(N)
    large = primes[primes > root]
    d4 = _expand(N, primes, lambda p, J: _d4_local(J), np.full(len(large), 4, dtype=np.int64), np.int64)
    return CoeffTable(N, a, lam, d4, np.cumsum(a), label=label, weight=weight)


def mobius(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    for p in prime_sieve(n):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def crosscheck_hecke(t: CoeffTable) -> float:
    """Max over n of ``|a(n) - sum_{d^2 | n} lam(n/d^2)/d| / (1 + |a(n)|)``."""
    N = t.N
    lam = np.asarray(t.lam, dtype=np.float64)
    recon = np.zeros(N + 1)
    for d in range(1, math.isqrt(N) + 1):
        sq = d * d
        recon[sq::sq] += lam[1 : N // sq + 1] / d
    a = np.asarray(t.a, dtype=np.float64)
    dev = np.abs(a[1:] - recon[1:]) / (1 + np.abs(a[1:]))
    return float(dev.max())


def sign_counts(t: CoeffTable, x: float, zero_tol: float | None = None) -> SignCounts:
    """Counts of ``n <= x`` with ``a_F(n)`` positive, negative or inside the zero band.

    ``zero_tol=None`` uses the band ``|a(n)| <= 1e-10 * d4(n)``.
    """
    n = int(math.floor(x))
    if n > t.N:
        raise TableTooSmallError(f"x={x} exceeds table bound N={t.N}")
    if n < 1:
        return SignCounts(x, 0, 0, 0, _tol_value(zero_tol), zero_tol is None)
    a = np.asarray(t.a[1 : n + 1], dtype=np.float64)
    band = _band(t, 1, n, zero_tol)
    plus = int(np.count_nonzero(a > band))
    minus = int(np.count_nonzero(a < -band))
    return SignCounts(x, plus, minus, n - plus - minus, _tol_value(zero_tol), zero_tol is None)


def _tol_value(zero_tol):
    return DEFAULT_ZERO_REL_TOL if zero_tol is None else float(zero_tol)


def _band(t: CoeffTable, lo: int, hi: int, zero_tol):
    if zero_tol is None:
        return DEFAULT_ZERO_REL_TOL * t.d4[lo : hi + 1]
    return float(zero_tol)


def rp_violation_scan(t: CoeffTable, tol: float = DEFAULT_RP_TOL) -> np.ndarray:
    """Indices ``n`` where ``|a_F(n)| > d_4(n) + tol``."""
    a = np.abs(np.asarray(t.a, dtype=np.float64))
    bad = np.flatnonzero(a[1:] > t.d4[1:] + tol) + 1
    return bad


def mean_value_ratio(t: CoeffTable, exponent: float = 0.65, start: int = 2) -> float:
    """``max_{start <= x <= N} |S_F(x)| / x^exponent`` (empirical mean-value constant)."""
    x = np.arange(start, t.N + 1, dtype=np.float64)
    if not len(x):
        raise TableTooSmallError(f"table bound {t.N} below start {start}")
    return float(np.max(np.abs(t.prefix_a[start:]) / x**exponent))


def partial_sums_segmented(
    F: EigenformData, N: int, points, segment: int = 1 << 20
) -> np.ndarray:
    """``S_F(x)`` at the given points without holding an ``N``-sized coefficient table.

    Each segment ``[lo, hi)`` is factored by the primes up to ``sqrt(N)``;
    the cofactor left over is 1 or a single large prime.  Only the per-prime
    ``e1`` lookup is ``N``-sized.
    """
    if N < 1:
        raise ValidationError(f"table bound must be >= 1, got {N}")
    F.check_coverage(N)
    pts = np.asarray(points, dtype=np.float64)
    if np.any(pts > N):
        raise TableTooSmallError(f"points exceed bound N={N}")
    order = np.argsort(pts, kind="stable")
    targets = np.floor(pts[order]).astype(np.int64)
    out = np.zeros(len(pts))

    primes = prime_sieve(N)
    root = math.isqrt(N)
    small = [int(p) for p in primes[primes <= root]]
    small_coeffs = {p: np.array(local_coeffs(F.locals[p], _max_exponent(p, N)), float) for p in small}
    e1_big = np.zeros(N + 1)
    for p in primes[primes > root]:
        e1_big[p] = float(F.locals[int(p)].e1)

    running = 0.0
    ti = 0
    for lo in range(1, N + 1, segment):
        hi = min(lo + segment, N + 1)
        n = np.arange(lo, hi, dtype=np.int64)
        rem = n.copy()
        a = np.ones(hi - lo)
        for p in small:
            start = (-lo) % p
            if start >= hi - lo:
                continue
            idx = np.arange(start, hi - lo, p)
            v = np.zeros(len(idx), dtype=np.int64)
            r = rem[idx]
            while True:
                m = r % p == 0
                if not m.any():
                    break
                r = np.where(m, r // p, r)
                v += m
            rem[idx] = r
            a[idx] *= small_coeffs[p][v]
        big = rem > 1
        a[big] *= e1_big[rem[big]]
        csum = running + np.cumsum(a)
        while ti < len(targets) and targets[ti] < hi:
            if targets[ti] >= lo:
                out[order[ti]] = csum[targets[ti] - lo]
            ti += 1
        running = float(csum[-1])
    return out
