"""Acceptance suite: one group of tests per criterion, tolerances as stated.

Reference values are closed forms (multiples of pi) or independent oracles
computed in the tests themselves.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import zeta

from zetavac import continuation as C
from zetavac import kernels as K
from zetavac import observables as O
from zetavac import spectrum as S
from zetavac.laurent import LogLaurentSeries, invert, lift_elementary, log_series
from zetavac.laurent import PiRational

PI = math.pi
BCS = ("dirichlet", "dirichlet_neumann", "neumann", "periodic")

crit = pytest.mark.criterion


# 1 -----------------------------------------------------------------------------

@crit("1", "Dirichlet a=1, xi=0: <T> = diag(-pi/24, -pi/24)")
@pytest.mark.parametrize("x", [0.1, 0.3, 0.5, 0.77])
def test_c1_dirichlet_stress_float(x):
    t0 = time.perf_counter()
    v = O.stress_energy(O.ObservableRequest(S.segment(1.0, "dirichlet")), x)
    assert time.perf_counter() - t0 < 1.0
    np.testing.assert_allclose(v.full, np.diag([-PI / 24, -PI / 24]), rtol=0, atol=1e-10)


@crit("1", "Dirichlet a=1, xi=0: <T> = diag(-pi/24, -pi/24)")
@pytest.mark.parametrize("x", [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6), Fraction(2, 3)])
def test_c1_dirichlet_stress_exact(x):
    v = O.stress_energy(O.ObservableRequest(S.segment(Fraction(1), "dirichlet"), exact=True), x)
    want = PiRational(Fraction(-1, 24), 1)
    assert v.exact_entries["T00"][0] == want
    assert v.exact_entries["T11"][0] == want


# 2 -----------------------------------------------------------------------------

@crit("2", "Dirichlet nonconformal T00 = xi (pi/2)/sin^2(pi x)")
@pytest.mark.parametrize("x", [0.1, 0.25, 0.5])
@pytest.mark.parametrize("xi", [0.0, 0.3, 1.0, -2.5])
def test_c2_nonconformal_t00(x, xi):
    v = O.stress_energy(O.ObservableRequest(S.segment(1.0, "dirichlet"), xi=xi), x)
    B = (PI / 2) / math.sin(PI * x) ** 2
    assert abs(v.nonconformal_part[0, 0] - B) < 1e-10
    assert abs((v.full[0, 0] - v.conformal_part[0, 0]) - xi * B) < 1e-10
    assert abs(v.conformal_part[0, 0] + PI / 24) < 1e-10


# 3 -----------------------------------------------------------------------------

ENERGIES = {"dirichlet": -PI / 24, "dirichlet_neumann": PI / 48, "neumann": -PI / 24, "periodic": -PI / 6}


@crit("3", "segment energies: D -pi/24, DN +pi/48, N -pi/24, P -pi/6")
def test_c3_energies():
    t0 = time.perf_counter()
    got = {bc: O.bulk_energy(O.ObservableRequest(S.segment(1.0, bc))) for bc in BCS}
    assert time.perf_counter() - t0 < 1.0
    for bc in BCS:
        assert abs(got[bc] - ENERGIES[bc]) < 1e-12, bc
        assert O.boundary_energy(O.ObservableRequest(S.segment(1.0, bc))) == 0.0


@crit("3", "segment energies: D -pi/24, DN +pi/48, N -pi/24, P -pi/6")
def test_c3_energies_exact():
    want = {"dirichlet": Fraction(-1, 24), "dirichlet_neumann": Fraction(1, 48),
            "neumann": Fraction(-1, 24), "periodic": Fraction(-1, 6)}
    for bc in BCS:
        e = O.bulk_energy(O.ObservableRequest(S.segment(Fraction(1), bc), exact=True))
        assert e == PiRational(want[bc], 1), bc


# 4 -----------------------------------------------------------------------------

@crit("4", "boundary forces, both prescriptions, gap < 1e-12")
@pytest.mark.parametrize("bc,f0", [("dirichlet", PI / 24), ("dirichlet_neumann", -PI / 48)])
def test_c4_forces(bc, f0):
    rep = O.boundary_force(O.ObservableRequest(S.segment(1.0, bc)))
    assert rep.value(0.0, "at_boundary") == pytest.approx(f0, abs=1e-12)
    assert rep.value(1.0, "at_boundary") == pytest.approx(-f0, abs=1e-12)
    assert rep.value(0.0, "interior_limit") == pytest.approx(f0, abs=1e-12)
    assert rep.value(1.0, "interior_limit") == pytest.approx(-f0, abs=1e-12)
    assert rep.agreement_gap < 1e-12


# 5 -----------------------------------------------------------------------------

@crit("5", "periodic <T> = diag(-pi/6, -pi/6) on a 20-point grid")
@pytest.mark.parametrize("xi", [0.0, 0.4])
def test_c5_periodic(xi):
    dom = S.segment(1.0, "periodic")
    grid = np.linspace(0.025, 0.975, 20)
    mats = np.array([O.stress_energy(O.ObservableRequest(dom, xi=xi), x).full for x in grid])
    assert np.max(np.abs(mats - np.diag([-PI / 6, -PI / 6]))) < 1e-12
    assert np.max(np.abs(mats - mats[0])) < 1e-12


# 6 -----------------------------------------------------------------------------

POINTS6 = (0.1, 0.3, 0.5, 0.65, 0.85)


@crit("6", "residue vs integration-by-parts Mellin (n=2) for D_{-1/2}(x,x)")
@pytest.mark.parametrize("bc", BCS)
def test_c6_cross_method(bc):
    t0 = time.perf_counter()
    dom = S.segment(1.0, bc)
    T = K.closed_form_cylinder(dom)
    for x in POINTS6:
        r = C.hankel_residue_D(K.expand_at_zero(T, x), 1).real
        q, _ = C.dirichlet_continued(C.kernel_mellin_spec(dom, x), -0.5, n=2)
        assert abs(q - r) < 1e-7, (x, q, r)
    assert time.perf_counter() - t0 < 60.0 / len(BCS)


# 7 -----------------------------------------------------------------------------

@crit("7", "free-space cylinder kernel: closed form vs Green-function route")
@pytest.mark.parametrize("d", [1, 2, 3])
def test_c7_green_route(d):
    k = K.closed_form_cylinder(S.free_space(d))
    for t in (0.2, 1.0, 3.0):
        for r in (0.1, 0.8, 2.0):
            x = np.zeros(d)
            y = np.zeros(d)
            y[-1] = r
            assert abs(k(t, x, y) - K.greens_route_cylinder(d, t, x, y)) < 1e-12


# 8 -----------------------------------------------------------------------------

@crit("8", "deformation identity residual is O(delta^2)")
@pytest.mark.parametrize("bc", ["dirichlet", "dirichlet_neumann"])
def test_c8_deformation_slope(bc):
    slope = O.deformation_slope(O.ObservableRequest(S.segment(1.0, bc)), (1e-2, 1e-3, 1e-4))
    assert abs(slope - 2.0) <= 0.05


# 9 -----------------------------------------------------------------------------

@crit("9", "property suites: series, kernels, spectra, Weyl exponent")
def test_c9_series_invariants():
    rng = np.random.default_rng(9)
    for _ in range(20):
        c = list(rng.normal(size=8))
        c[0] = 1.0 + abs(c[0])
        a = LogLaurentSeries.from_coeffs(c, int(rng.integers(-2, 3)))
        one = a * invert(a)
        assert abs(one.coefficient(0) - 1) < 1e-12
        assert all(abs(one.coefficient(k)) < 1e-10 for k in range(1, one.truncation_order))
        w = LogLaurentSeries.from_coeffs([0.0] + list(rng.normal(size=7)), 0)
        back = log_series(lift_elementary("exp", w))
        assert all(abs(back.coefficient(k) - w.coefficient(k)) < 1e-10 for k in range(back.truncation_order))
        assert a.derivative().residue() == 0


@crit("9", "property suites: series, kernels, spectra, Weyl exponent")
def test_c9_kernel_properties():
    rng = np.random.default_rng(19)
    for bc in BCS:
        dom = S.segment(1.0, bc)
        T = K.closed_form_cylinder(dom)
        Tt = K.modified_from_cylinder(T)
        for _ in range(10):
            t = rng.uniform(0.05, 2.0)
            x, y = rng.uniform(0.02, 0.98, size=2)
            assert abs(T(t, x, y) - T(t, y, x)) < 1e-12
            h = 1e-4 * t
            fd = -(Tt(t + h, x, y) - Tt(t - h, x, y)) / (2 * h)
            assert abs(fd - T(t, x, y)) <= 1e-7 * max(abs(T(t, x, y)), 1e-3)
        if bc == "dirichlet":
            for y in (0.2, 0.7):
                assert abs(T(0.5, 0.0, y)) < 1e-13 and abs(T(0.5, 1.0, y)) < 1e-13


@crit("9", "property suites: series, kernels, spectra, Weyl exponent")
@pytest.mark.parametrize("bc", BCS)
def test_c9_spectral_properties(bc):
    m = S.segment_model(1.0, bc)
    G = S.gram_matrix(m, 8)
    assert np.max(np.abs(G - np.eye(8))) < 1e-8
    for k in range(6):
        assert S.eigen_residual(m, k, 0.37) < 1e-5
    rep = S.weyl_check(m, 400)
    assert abs(rep.fitted_exponent - 1.0) <= 0.01


# 10 ----------------------------------------------------------------------------

@crit("10", "conformal recombination and xi-affinity over random xi")
@pytest.mark.parametrize("bc", BCS)
def test_c10_recombination(bc):
    rng = np.random.default_rng(10)
    dom = S.segment(1.0, bc)
    for x in (0.2, 0.55):
        for xi in rng.uniform(-3, 3, size=20):
            v = O.stress_energy(O.ObservableRequest(dom, xi=float(xi)), x)
            recomb = v.conformal_part + (xi - v.xi_critical) * v.nonconformal_part
            assert np.max(np.abs(v.full - recomb)) < 1e-12
        x1, x2, x3 = rng.uniform(-2, 2, size=3)
        m1, m2, m3 = (O.stress_energy(O.ObservableRequest(dom, xi=float(z)), x).full for z in (x1, x2, x3))
        # collinearity in xi
        interp = m1 + (m2 - m1) * (x3 - x1) / (x2 - x1)
        assert np.max(np.abs(interp - m3)) < 1e-12


@crit("10", "conformal recombination and xi-affinity over random xi")
def test_c10_split_helper():
    dom = S.segment(1.0, "dirichlet")
    f = lambda xi: O.stress_energy(O.ObservableRequest(dom, xi=xi), 0.3).full
    conf, nonconf = O.conformal_split(f, 0.7, 1)
    v = O.stress_energy(O.ObservableRequest(dom, xi=0.7), 0.3)
    assert np.max(np.abs(conf - v.conformal_part)) < 1e-12
    assert np.max(np.abs(nonconf - v.nonconformal_part)) < 1e-12
    assert O.xi_critical(1) == 0.0


# 11 ----------------------------------------------------------------------------

@crit("11", "integral of conformal T00 equals the renormalized energy")
@pytest.mark.parametrize("bc", BCS)
def test_c11_density_integral(bc):
    assert abs(O.conformal_density_integral(S.segment(1.0, bc)) - ENERGIES[bc]) < 1e-9


# slab structure -------------------------------------------------------------------

@crit("slab", "slab reduction: mixed blocks, passthrough, pole flags, oracles")
def test_slab_passthrough():
    base = S.segment(1.0, "dirichlet")
    a = O.slab_reduce(base, 0)(0.3, 0.2).full
    b = O.stress_energy(O.ObservableRequest(base, xi=0.2), 0.3).full
    assert np.array_equal(a, b)
    e0 = O.reduced_energy(O.ObservableRequest(base))
    assert e0.bulk == O.bulk_energy(O.ObservableRequest(base))


@crit("slab", "slab reduction: mixed blocks, passthrough, pole flags, oracles")
@pytest.mark.parametrize("d2", [1, 2, 3])
def test_slab_structure(d2):
    red = O.slab_reduce(S.segment(1.0, "dirichlet"), d2)
    comp = red.components(0.4)
    assert comp["mixed"].value == 0.0
    v = red(0.4, 0.1)
    off = v.full - np.diag(np.diag(v.full))
    assert np.max(np.abs(off)) == 0.0
    # Gamma((u - d2 - 1)/2) has a pole at u = 0 exactly when d2 is odd
    assert comp["d_minus_half"].gamma_ratio_pole == (d2 % 2 == 1)
    assert comp["dd_trans"].gamma_ratio_pole == (d2 % 2 == 1)
    assert comp["dd_base"].gamma_ratio_pole == (d2 % 2 == 1)
    # all Dirichlet poles are cancelled by vanishing base coefficients
    assert all(c.pole_order == 0 for c in comp.values())


@crit("slab", "slab reduction: mixed blocks, passthrough, pole flags, oracles")
def test_slab_plates_oracles():
    base = S.segment(1.0, "dirichlet")
    e2 = O.reduced_energy(O.ObservableRequest(S.slab(base, 2)))
    assert abs(e2.bulk + PI**2 / 1440) < 1e-12 and not e2.gamma_ratio_pole
    e1 = O.reduced_energy(O.ObservableRequest(S.slab(base, 1)))
    assert abs(e1.bulk + zeta(3) / (16 * PI)) < 1e-10 and e1.gamma_ratio_pole and e1.pole_order == 0
    v = O.stress_energy(O.ObservableRequest(S.slab(base, 2), xi=O.xi_critical(3)), 0.3)
    np.testing.assert_allclose(np.diag(v.full), np.array([-1, -3, 1, 1]) * PI**2 / 1440, atol=1e-12)
