import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from spinorzeta.coeffs import build_table, table_from_coefficients
from spinorzeta.detector import (
    PHI_SCALE,
    find_extrema,
    fejer_mass,
    j_tau,
    kernel,
    phase_matched_t,
    phi,
    r_s_beta,
    scan_window,
    sign_change_triple,
)
from spinorzeta.errors import TableTooSmallError, ValidationError
from spinorzeta.ingest import gen_tempered
from spinorzeta.voronoi import PHASE_CONSTANT

C = PHASE_CONSTANT


def test_kernel_examples():
    assert kernel(0.0, 12, 1) == pytest.approx(2.0)
    assert kernel(0.0, 12, -1) == 0.0
    assert kernel(1.0, 12, 1) == 0.0
    assert kernel(-1.0, 5, -1) == 0.0
    with pytest.raises(ValidationError):
        kernel(1.01, 12, 1)
    with pytest.raises(ValidationError):
        kernel(0.5, 12, 0)


@given(st.floats(-1, 1), st.floats(1.01, 50), st.sampled_from([1, -1]))
def test_kernel_nonnegative(u, kappa, tau):
    assert kernel(u, kappa, tau) >= 0


@pytest.mark.parametrize("kappa", [1.5, 4, 12])
@pytest.mark.parametrize("tau", [1, -1])
def test_kernel_mass_against_quadrature(kappa, tau):
    val, _ = integrate.quad(lambda u: kernel(u, kappa, tau), -1, 1, points=[0], limit=500)
    assert fejer_mass(kappa, tau) == pytest.approx(val, abs=1e-10)


def test_phi_examples(trivial_table):
    # trivial form: S(10) = 89
    for d in (1e-9, 1e-3):
        v = 10**0.25 * (1 + d)
        assert phi(trivial_table, v) == pytest.approx(PHI_SCALE * 89 / v**1.5, rel=1e-14)
    assert phi(trivial_table, 0.5) == 0.0
    with pytest.raises(TableTooSmallError):
        phi(trivial_table, 20.0)
    with pytest.raises(ValidationError):
        phi(trivial_table, 0.0)


def test_j_tau_zero_table():
    t = table_from_coefficients(np.zeros(100_000))
    res = j_tau(t, 10.0, 2.0, 1)
    assert res.J == 0.0 and res.deviation == -0.5


@pytest.mark.parametrize("kappa", [2, 4, 8, 12, 24])
@pytest.mark.parametrize("tau", [1, -1])
def test_j_tau_constant_phi_gives_kernel_mass(kappa, tau):
    res = j_tau(None, 3 * kappa, kappa, tau, phi_fn=lambda v: np.ones_like(v))
    assert res.J == pytest.approx(fejer_mass(kappa, tau), abs=1e-8)


def test_j_tau_piecewise_quad_oracle(trivial_table):
    t0, kappa = 5.0, 2.0
    pre = trivial_table.prefix_a
    breaks = [-1.0]
    for m in range(int((t0 - kappa) ** 4) + 1, int((t0 + kappa) ** 4) + 1):
        breaks.append((m**0.25 - t0) / kappa)
    breaks.append(1.0)
    breaks = sorted(set(breaks) | {0.0})
    for tau in (1, -1):
        total = 0.0
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            mid = t0 + kappa * (lo + hi) / 2
            s = pre[int(math.floor(mid**4))]
            val, _ = integrate.quad(
                lambda u: PHI_SCALE * s / (t0 + kappa * u) ** 1.5 * kernel(u, kappa, tau), lo, hi
            )
            total += val
        assert j_tau(trivial_table, t0, kappa, tau).J == pytest.approx(total, rel=1e-10)


def test_j_tau_refinement_stable(tempered_table):
    for tau in (1, -1):
        a = j_tau(tempered_table, 12.0, 4.0, tau, n_quad=1000).J
        b = j_tau(tempered_table, 12.0, 4.0, tau, n_quad=2000).J
        assert a == pytest.approx(b, abs=1e-10)


def test_j_tau_preconditions(tempered_table):
    with pytest.raises(ValidationError):
        j_tau(tempered_table, 5.0, 4.0, 1)
    with pytest.raises(ValidationError):
        j_tau(tempered_table, 12.0, 4.0, 1, n_quad=500)
    with pytest.raises(ValidationError):
        j_tau(tempered_table, 12.0, 1.0, 1)
    with pytest.raises(TableTooSmallError):
        j_tau(tempered_table, 30.0, 4.0, 1)


def _fejer(w):
    return 1.0 if w == 0 else (math.sin(w / 2) / (w / 2)) ** 2


def _r_closed(beta, t, kappa, tau):
    B, ck = C * beta, C * kappa
    amp = _fejer(B * kappa) + tau / 2 * (_fejer(B * kappa + ck) + _fejer(B * kappa - ck))
    return math.cos(B * t + math.pi / 4) * amp


@pytest.mark.parametrize("beta", [1.0, 2 ** 0.25, 2.0])
@pytest.mark.parametrize("kappa", [4, 12])
@pytest.mark.parametrize("tau", [1, -1])
def test_r_s_beta_oracles(beta, kappa, tau):
    t = 60.0
    r, s = r_s_beta(beta, t, kappa, tau)
    assert r == pytest.approx(_r_closed(beta, t, kappa, tau), abs=1e-10)
    brk = list(np.linspace(-1, 1, 201))
    s_ref = sum(
        integrate.quad(
            lambda u: kernel(u, kappa, tau) * math.sin(C * beta * (t + kappa * u) + math.pi / 4) / (t + kappa * u),
            lo, hi,
        )[0]
        for lo, hi in zip(brk[:-1], brk[1:])
    )
    assert s == pytest.approx(s_ref, abs=1e-10)


@pytest.mark.parametrize("t0", [50, 100])
@pytest.mark.parametrize("kappa", [4, 8, 12, 24])
@pytest.mark.parametrize("tau", [1, -1])
def test_r_at_phase_matched_t(t0, kappa, tau):
    t = phase_matched_t(t0)
    assert (C * t + math.pi / 4) / (2 * math.pi) == pytest.approx(round((C * t + math.pi / 4) / (2 * math.pi)))
    r, _ = r_s_beta(1.0, t, kappa, tau)
    assert abs(r - tau / 2) <= 3 / (16 * math.pi * kappa**2)


def test_extrema_trivial_has_no_negative_sum(trivial_table):
    rep = find_extrema(trivial_table, 1000.0, 3)
    assert rep.S2 > 0 and not rep.lemma_holds
    assert rep.x1 == math.floor(1000 + 3 * 1000**0.75)
    assert rep.c1_emp == pytest.approx(rep.S1 / 1000**0.375)


def test_extrema_empty_window(tempered_table):
    rep = find_extrema(tempered_table, 5000.5, 0)
    assert rep.x1 == rep.x2 == 5000.5
    assert rep.S1 == rep.S2 == tempered_table.partial_sum(5000.5)


def test_extrema_window_too_large(trivial_table):
    with pytest.raises(TableTooSmallError):
        find_extrema(trivial_table, 19_900, 3)


def test_scan_window_trivial(trivial_table):
    rep = scan_window(trivial_table, 1000.0)
    assert rep.minus == 0 and rep.zero == 0
    assert rep.plus == math.floor(1000 + 3 * 1000**0.75) - 1000
    empty = scan_window(trivial_table, 1000.0, c=0)
    assert (empty.plus, empty.minus, empty.zero) == (0, 0, 0)


def test_scan_window_counts_partition(tempered_table):
    rep = scan_window(tempered_table, 50_000.0)
    n = math.floor(50_000 + 3 * 50_000**0.75) - 50_000
    assert rep.plus + rep.minus + rep.zero == n
    assert rep.lower_target == pytest.approx(50_000 ** (0.375 - 0.05))


def test_scan_window_zero_band():
    a = np.zeros(2001)
    a[1::2] = 1e-12
    a[2::4] = -1.0
    t = table_from_coefficients(a)
    rep = scan_window(t, 100.0, zero_tol=1e-9)
    assert rep.plus == 0 and rep.minus > 0 and rep.zero > 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 50), st.floats(200, 1e4))
def test_sign_change_triple_consistency(seed, x):
    t = build_table(gen_tempered(seed, 20_000), 20_000)
    tri = sign_change_triple(t, x)
    x1, x2, x3 = tri.points
    assert x <= x1 <= x2 <= x3
    assert tri.values[1] - tri.values[0] <= tri.positive_mass + 1e-9
    assert tri.values[1] - tri.values[2] <= tri.negative_mass + 1e-9
