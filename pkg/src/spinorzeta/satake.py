"""Local spin Euler factors of a genus-2 Hecke eigenform.

A local factor at ``p`` is the reciprocal of

    1 - e1 t + e2 t^2 - e1 t^3 + t^4,

whose reciprocal roots are the four spin parameters ``beta``.  The relation
``alpha0^2 alpha1 alpha2 = 1`` between the Satake parameters forces the
palindromic shape, so ``(e1, e2)`` determine the factor completely.

Arithmetic is generic: integer or :class:`fractions.Fraction` inputs stay
exact through :func:`local_coeffs`, :func:`local_lambda` and
:func:`hecke_to_local`.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational, Real

import numpy as np

from .errors import MissingPrimeError, RootFindingError, ValidationError
from .primes import prime_sieve

DEFAULT_TEMPERED_TOL = 1e-8


@dataclass(frozen=True)
class LocalFactor:
    p: int
    e1: Real
    e2: Real

    def __post_init__(self):
        if self.p < 2:
            raise ValidationError(f"prime index must be >= 2, got {self.p}")
        if not (math.isfinite(self.e1) and math.isfinite(self.e2)):
            raise ValidationError(f"non-finite local factor at p={self.p}")

    @property
    def polynomial(self) -> tuple:
        """Coefficients of the quartic in ``t``, constant term first."""
        return (1, -self.e1, self.e2, -self.e1, 1)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.e1, Rational) and isinstance(self.e2, Rational)

    def satisfies_tempered_bounds(self) -> bool:
        """Necessary conditions for temperedness, |e1| <= 4 and |e2| <= 6."""
        return abs(self.e1) <= 4 and abs(self.e2) <= 6


@dataclass(frozen=True)
class SpinParameters:
    # Ordered so that beta[0] * beta[3] == beta[1] * beta[2] == 1.
    beta: tuple[complex, complex, complex, complex]

    def is_palindromic(self, tol: float = 1e-8) -> bool:
        b = self.beta
        return abs(b[0] * b[3] - 1) <= tol and abs(b[1] * b[2] - 1) <= tol

    def is_conjugation_closed(self, tol: float = 1e-8) -> bool:
        remaining = list(self.beta)
        for b in self.beta:
            dist = [abs(b.conjugate() - r) for r in remaining]
            i = int(np.argmin(dist))
            if dist[i] > tol:
                return False
            remaining.pop(i)
        return True

    def moduli(self) -> np.ndarray:
        return np.abs(np.asarray(self.beta))


@dataclass(frozen=True)
class EigenformData:
    weight: int
    fe_sign: int
    label: str
    locals: Mapping[int, LocalFactor] = field(repr=False)
    prime_bound: int

    def __post_init__(self):
        if self.weight < 1:
            raise ValidationError(f"weight must be positive, got {self.weight}")
        if self.fe_sign not in (1, -1):
            raise ValidationError(f"fe_sign must be +1 or -1, got {self.fe_sign}")
        if self.fe_sign != (-1) ** self.weight:
            raise ValidationError(
                f"fe_sign {self.fe_sign:+d} does not match (-1)^k for k={self.weight}"
            )
        primes = prime_sieve(self.prime_bound)
        for p in primes:
            if int(p) not in self.locals:
                raise MissingPrimeError(int(p))
        extra = [p for p in self.locals if p > self.prime_bound]
        if extra:
            raise ValidationError(f"local factor at {min(extra)} exceeds prime_bound")

    @classmethod
    def from_locals(cls, weight: int, label: str, factors, prime_bound: int | None = None):
        """Build from an iterable of :class:`LocalFactor`, sorted by prime."""
        ordered = dict(sorted(((f.p, f) for f in factors)))
        if prime_bound is None:
            prime_bound = max(ordered) if ordered else 1
        return cls(weight, (-1) ** weight, label, ordered, prime_bound)

    def local(self, p: int) -> LocalFactor:
        try:
            return self.locals[p]
        except KeyError:
            raise MissingPrimeError(p) from None

    def check_coverage(self, n: int) -> None:
        """Raise naming the first prime <= n without data."""
        for p in prime_sieve(n):
            if int(p) not in self.locals:
                raise MissingPrimeError(int(p))

    @property
    def is_exact(self) -> bool:
        return all(f.is_exact for f in self.locals.values())


def _inv_p(p: int, like) -> Real:
    if all(isinstance(v, Rational) for v in like):
        return Fraction(1, p)
    return 1.0 / p


def local_coeffs(f: LocalFactor, J: int) -> list:
    """Coefficients of ``1/(1 - e1 t + e2 t^2 - e1 t^3 + t^4)`` up to ``t^J``.

    Entry ``j`` is ``a_F(p^j)``.
    """
    if J < 0:
        raise ValidationError(f"J must be >= 0, got {J}")
    e1, e2 = f.e1, f.e2
    c = [1]
    for j in range(1, J + 1):
        v = e1 * c[j - 1]
        if j >= 2:
            v -= e2 * c[j - 2]
        if j >= 3:
            v += e1 * c[j - 3]
        if j >= 4:
            v -= c[j - 4]
        c.append(v)
    return c


def local_lambda(f: LocalFactor, J: int) -> list:
    """Normalised Hecke eigenvalues ``lambda_F(p^j)`` for ``j <= J``.

    The lambda-series at ``p`` is the a-series times ``1 - t^2/p``.
    """
    a = local_coeffs(f, J)
    inv_p = _inv_p(f.p, (f.e1, f.e2))
    return [a[j] - (a[j - 2] * inv_p if j >= 2 else 0) for j in range(J + 1)]


def hecke_to_local(p: int, lam_p: Real, lam_p2: Real) -> LocalFactor:
    """Local factor with ``lambda(p) = lam_p`` and ``lambda(p^2) = lam_p2``."""
    inv_p = _inv_p(p, (lam_p, lam_p2))
    return LocalFactor(p, lam_p, lam_p * lam_p - lam_p2 - inv_p)


def _quartic_residual(e1: float, e2: float, t: complex) -> float:
    return abs((((t - e1) * t + e2) * t - e1) * t + 1)


def _pair_from_trace(u: complex) -> tuple[complex, complex]:
    # t^2 - u t + 1 = 0; take the larger root first and invert for the other.
    # A trace within rounding of +-2 is a double root at +-1; snapping it
    # avoids an O(sqrt(eps)) split off the unit circle.
    if abs(u.imag) <= 1e-13 and abs(abs(u.real) - 2) <= 1e-13:
        u = complex(math.copysign(2.0, u.real), 0.0)
    s = cmath.sqrt(u * u - 4)
    w = (u + s) / 2 if abs(u + s) >= abs(u - s) else (u - s) / 2
    return w, 1 / w


def spin_roots(f: LocalFactor) -> SpinParameters:
    """Roots of ``t^4 - e1 t^3 + e2 t^2 - e1 t + 1``.

    The substitution ``u = t + 1/t`` turns the palindromic quartic into
    ``u^2 - e1 u + (e2 - 2) = 0``, solved in closed form.
    """
    e1, e2 = float(f.e1), float(f.e2)
    d = e1 * e1 - 4 * e2 + 8
    if d < 0 and -d <= 64 * 2.2e-16 * (e1 * e1 + 4 * abs(e2) + 8):
        d = 0.0  # rounding noise around a double trace
    disc = cmath.sqrt(d)
    q = (e1 + disc) / 2 if e1 >= 0 else (e1 - disc) / 2
    if q == 0:
        u1 = u2 = 0j
    else:
        u1, u2 = q, (e2 - 2) / q
    b1, b4 = _pair_from_trace(u1)
    b2, b3 = _pair_from_trace(u2)
    roots = [b1, b2, b3, b4]

    tol = 1e-9 * (1 + abs(e1) + abs(e2))
    for i, r in enumerate(roots):
        for _ in range(4):
            if _quartic_residual(e1, e2, r) <= tol:
                break
            dp = ((4 * r - 3 * e1) * r + 2 * e2) * r - e1
            if dp == 0:
                break
            r = r - ((((r - e1) * r + e2) * r - e1) * r + 1) / dp
        roots[i] = r
    worst = max(_quartic_residual(e1, e2, r) for r in roots)
    if worst > tol:
        raise RootFindingError(f.polynomial, worst)
    return SpinParameters(tuple(complex(r) for r in roots))


def is_tempered(f: LocalFactor, tol: float = DEFAULT_TEMPERED_TOL) -> bool:
    if tol <= 0:
        raise ValidationError("tol must be positive")
    return bool(np.all(np.abs(spin_roots(f).moduli() - 1) <= tol))
