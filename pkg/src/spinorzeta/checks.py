"""Invariant suites run by the ``check`` command."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coeffs import CoeffTable, build_table, crosscheck_hecke, mean_value_ratio, rp_violation_scan
from .primes import prime_sieve
from .satake import (
    EigenformData,
    hecke_to_local,
    is_tempered,
    local_coeffs,
    local_lambda,
    spin_roots,
)

ROOT_CHECK_PRIMES = 1000


@dataclass(frozen=True)
class CheckResult:
    module: str
    invariant: str
    passed: bool
    detail: str


def naive_coefficient(F: EigenformData, n: int) -> float:
    """``a_F(n)`` by trial division, one prime power at a time."""
    value, m, p = 1.0, n, 2
    while p * p <= m:
        if m % p == 0:
            v = 0
            while m % p == 0:
                m //= p
                v += 1
            value *= float(local_coeffs(F.locals[p], v)[v])
        p += 1
    if m > 1:
        value *= float(F.locals[m].e1)
    return value


def _satake_checks(F: EigenformData, N: int) -> list[CheckResult]:
    out = []
    primes = [int(p) for p in prime_sieve(min(N, F.prime_bound))]
    worst_conv = 0.0
    worst_inv = 0.0
    tempered_bound_ok = True
    worst_pair = 0.0
    n_tempered = 0
    for p in primes:
        f = F.locals[p]
        J = max(4, int(math.log(N) / math.log(p))) if N > 1 else 4
        c = np.array(local_coeffs(f, J), dtype=np.float64)
        poly = np.array(f.polynomial, dtype=np.float64)
        prod = np.convolve(c, poly)[: J + 1]
        target = np.zeros(J + 1)
        target[0] = 1
        scale = 1 + np.abs(c).max() * np.abs(poly).sum()
        worst_conv = max(worst_conv, float(np.abs(prod - target).max() / scale))
        back = hecke_to_local(p, *local_lambda(f, 2)[1:])
        scale = 1 + float(f.e1) ** 2
        worst_inv = max(worst_inv, abs(float(back.e1 - f.e1)) / scale, abs(float(back.e2 - f.e2)) / scale)
        if p <= ROOT_CHECK_PRIMES:
            roots = spin_roots(f)
            b = np.asarray(roots.beta)
            inv = 1 / b
            worst_pair = max(worst_pair, float(max(np.abs(b - r).min() for r in inv)))
            if is_tempered(f):
                n_tempered += 1
                binom = np.array([math.comb(j + 3, 3) for j in range(J + 1)])
                tempered_bound_ok &= bool(np.all(np.abs(c) <= binom + 1e-6))
    checked = sum(1 for p in primes if p <= ROOT_CHECK_PRIMES)
    out.append(CheckResult("satake_core", "recurrence re-multiplication", worst_conv <= 1e-12,
                           f"max relative residual {worst_conv:.3e}"))
    out.append(CheckResult("satake_core", "hecke_to_local o local_lambda identity", worst_inv <= 1e-12,
                           f"max deviation relative to 1 + e1^2: {worst_inv:.3e}"))
    out.append(CheckResult("satake_core", "spin roots closed under inversion", worst_pair <= 1e-8,
                           f"max distance {worst_pair:.3e} over {checked} primes"))
    out.append(CheckResult("satake_core", "tempered local coefficient bound", tempered_bound_ok,
                           f"{n_tempered}/{checked} local factors tempered"))
    return out


def _coeff_checks(F: EigenformData, t: CoeffTable, seed: int = 0) -> list[CheckResult]:
    out = []
    N = t.N
    a = np.asarray(t.a, dtype=np.float64)
    lam = np.asarray(t.lam, dtype=np.float64)
    ones = a[1] == 1 and lam[1] == 1 and t.d4[1] == 1
    out.append(CheckResult("coeff_engine", "unit at n = 1", bool(ones), f"a[1]={a[1]}, lam[1]={lam[1]}"))

    rng = np.random.default_rng(seed)
    worst = 0.0
    d4_ok = True
    tested = 0
    if N >= 6:
        m = rng.integers(2, max(3, math.isqrt(N)), size=4000)
        n = rng.integers(2, max(3, math.isqrt(N)), size=4000)
        keep = (np.gcd(m, n) == 1) & (m * n <= N)
        m, n = m[keep], n[keep]
        tested = len(m)
        for arr, name in ((a, "a"), (lam, "lam")):
            den = np.maximum(1.0, np.abs(arr[m * n]))
            worst = max(worst, float(np.max(np.abs(arr[m * n] - arr[m] * arr[n]) / den, initial=0.0)))
        d4_ok = bool(np.all(t.d4[m * n] == t.d4[m] * t.d4[n]))
    out.append(CheckResult("coeff_engine", "multiplicativity", worst <= 1e-9 and d4_ok,
                           f"{tested} coprime pairs, max relative deviation {worst:.3e}, d4 exact={d4_ok}"))

    prefix_dev = float(np.max(np.abs(np.diff(t.prefix_a) - a[1:]) / (1 + np.abs(t.prefix_a[1:]))))
    out.append(CheckResult("coeff_engine", "prefix sums", prefix_dev <= 1e-9,
                           f"max relative step deviation {prefix_dev:.3e}"))

    dev = crosscheck_hecke(t)
    out.append(CheckResult("coeff_engine", "Hecke relation a = sum lam(n/d^2)/d", dev <= 1e-9,
                           f"max relative deviation {dev:.3e}"))

    limit = min(N, 10_000)
    naive = np.array([naive_coefficient(F, k) for k in range(1, limit + 1)])
    sieve_dev = float(np.max(np.abs(naive - a[1 : limit + 1]) / np.maximum(1.0, np.abs(naive))))
    out.append(CheckResult("coeff_engine", "sieve matches trial-division oracle", sieve_dev <= 1e-12,
                           f"n <= {limit}, max relative deviation {sieve_dev:.3e}"))

    primes = [int(p) for p in prime_sieve(N)]
    all_tempered = all(is_tempered(F.locals[p]) for p in primes if p <= ROOT_CHECK_PRIMES) and all(
        F.locals[p].satisfies_tempered_bounds() for p in primes
    )
    bad = rp_violation_scan(t)
    if all_tempered:
        out.append(CheckResult("coeff_engine", "|a(n)| <= d4(n)", len(bad) == 0,
                               f"{len(bad)} violations" + (f", first at n={int(bad[0])}" if len(bad) else "")))
    else:
        out.append(CheckResult("coeff_engine", "|a(n)| <= d4(n)", True,
                               f"data not tempered; {len(bad)} violations recorded, not asserted"))
    if N >= 2:
        ratio = mean_value_ratio(t)
        out.append(CheckResult("coeff_engine", "mean value max |S(x)|/x^0.65", True,
                               f"{ratio:.6g} (recorded)"))
    return out


def run_checks(F: EigenformData, N: int, table: CoeffTable | None = None) -> list[CheckResult]:
    if table is None:
        table = build_table(F, N)
    return _satake_checks(F, N) + _coeff_checks(F, table)
