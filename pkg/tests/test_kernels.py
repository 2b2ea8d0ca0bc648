import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetavac import kernels as K
from zetavac import spectrum as S
from zetavac.errors import (
    KindMismatch,
    NonPositiveTime,
    SeriesDomainViolation,
    TailBoundUnreachable,
    UnsupportedDomain,
    UnsupportedForSpectralBacking,
    UnsupportedStencil,
)
from zetavac.laurent import PiRational

PI = math.pi


def test_free_space_d3_diagonal():
    k = K.closed_form_cylinder(S.free_space(3))
    x = np.zeros(3)
    for t in (0.1, 0.5, 2.0):
        assert abs(k(t, x, x) - 1 / (PI**2 * t**3)) < 1e-12 / t**3


def test_free_space_d1_formula():
    k = K.closed_form_cylinder(S.free_space(1))
    t, r = 0.7, 0.4
    assert abs(k(t, np.zeros(1), np.array([r])) - t / (PI * (t * t + r * r))) < 1e-15


def test_periodic_diagonal_formula():
    a = 1.5
    k = K.closed_form_cylinder(S.segment(a, "periodic"))
    for t in (0.05, 0.4, 3.0):
        want = 2.0 / (a * math.expm1(2 * PI * t / a))
        for x in (0.1, 0.9):
            assert abs(k(t, x, x) - want) < 1e-12 * (1 + want)


def test_trace_dirichlet_value():
    tr = K.trace_function(S.segment(1.0, "dirichlet"))
    assert abs(tr(1.0) - 0.045166) < 1e-6
    assert abs(tr(1.0) - 1 / math.expm1(PI)) < 1e-15


@pytest.mark.parametrize("bc", S.BOUNDARY_CONDITIONS)
def test_trace_closed_vs_spectral(bc):
    dom = S.segment(1.0, bc)
    a = K.trace_function(dom)
    b = K.trace_function(S.segment_model(1.0, bc))
    for t in (0.1, 1.0, 3.0):
        assert abs(a(t) - b(t)) < 1e-11 * (1 + abs(a(t)))


@pytest.mark.parametrize("bc", S.BOUNDARY_CONDITIONS)
@pytest.mark.parametrize("stencil", [(0, 0), (1, 0), (1, 1), (2, 0)])
def test_spectral_vs_closed_form(bc, stencil):
    dom = S.segment(1.0, bc)
    exact = K.closed_form_cylinder(dom, stencil)
    approx = K.spectral_cylinder(S.segment_model(1.0, bc), stencil)
    for t in (0.2, 1.0):
        for x, y in ((0.3, 0.6), (0.45, 0.45)):
            want = exact(t, x, y)
            assert abs(approx(t, x, y) - want) < 1e-10 * (1 + abs(want))


@pytest.mark.parametrize("bc", S.BOUNDARY_CONDITIONS)
def test_heat_images_vs_spectral(bc):
    h1 = K.closed_form_heat(S.segment(1.0, bc))
    h2 = K.spectral_kernel(S.segment_model(1.0, bc), "heat")
    for t in (0.01, 0.3):
        assert abs(h1(t, 0.2, 0.7) - h2(t, 0.2, 0.7)) < 1e-11


def test_modified_is_integral_of_cylinder():
    dom = S.segment(1.0, "dirichlet_neumann")
    T = K.closed_form_cylinder(dom)
    Tt = K.modified_from_cylinder(T)
    from scipy.integrate import quad
    t0, x, y = 0.3, 0.25, 0.6
    integral, _ = quad(lambda s: T(s, x, y), t0, np.inf, epsabs=1e-13)
    assert abs(Tt(t0, x, y) - integral) < 1e-10


def test_large_t_decay():
    dom = S.segment(1.0, "dirichlet")
    T = K.closed_form_cylinder(dom)
    t = 8.0
    lead = 2 * math.sin(PI * 0.3) ** 2 * math.exp(-PI * t)
    assert abs(T(t, 0.3, 0.3) / lead - 1) < 1e-9


@pytest.mark.parametrize("bc", S.BOUNDARY_CONDITIONS)
@pytest.mark.parametrize("stencil", [(0, 0), (1, 1), (2, 0)])
def test_expansion_fidelity(bc, stencil):
    dom = S.segment(1.0, bc)
    T = K.closed_form_cylinder(dom, stencil)
    ex = K.expand_at_zero(T, 0.3, order=8)
    for t in (1e-3, 1e-2):
        assert abs(ex.series.evaluate(t).real - T(t, 0.3, 0.3)) < 1e-9 * max(1.0, abs(T(t, 0.3, 0.3)) * t)


def test_exact_expansion_dirichlet_midpoint():
    T = K.closed_form_cylinder(S.segment(Fraction(1), "dirichlet"))
    ex = K.expand_at_zero(T, Fraction(1, 2), order=4, exact=True)
    assert ex.exact is not None
    # leading bulk term 1/(pi t)
    assert ex.exact.coefficient(-1) == PiRational(Fraction(1), -1)
    for k in ex.series.orders:
        assert abs(float(ex.exact.coefficient(k)) - ex.series.coefficient(k).real) < 1e-12


def test_exact_mode_irrational_cosines():
    T = K.closed_form_cylinder(S.segment(Fraction(1), "dirichlet"))
    with pytest.raises(SeriesDomainViolation):
        K.expand_at_zero(T, Fraction(1, 7), order=4, exact=True)


def test_product_heat_factorizes():
    h1 = K.closed_form_heat(S.segment(1.0, "dirichlet"))
    h2 = K.closed_form_heat(S.segment(2.0, "neumann"))
    p = K.heat_from_product(h1, h2)
    t = 0.1
    assert p(t, (0.3, 0.5), (0.4, 1.5)) == h1(t, 0.3, 0.4) * h2(t, 0.5, 1.5)
    tr = K.heat_from_product(K.trace_function(S.segment(1.0, "dirichlet"), "heat"),
                             K.trace_function(S.segment(1.0, "dirichlet"), "heat"))
    pm = S.product_model(S.segment_model(1.0, "dirichlet"), S.segment_model(1.0, "dirichlet"))
    direct = K.trace_function(pm, "heat")
    assert abs(tr(0.05) - direct(0.05)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0.05, 3.0))
def test_kernel_symmetric(x, y, t):
    T = K.closed_form_cylinder(S.segment(1.0, "dirichlet_neumann"))
    assert abs(T(t, x, y) - T(t, y, x)) < 1e-12 * (1 + abs(T(t, x, y)))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 4.0), st.floats(0.1, 0.9), st.floats(0.1, 2.0))
def test_length_scaling(a, u, t):
    # T_a(t; ax, ax) = T_1(t/a; x, x) / a
    Ta = K.closed_form_cylinder(S.segment(a, "dirichlet"))
    T1 = K.closed_form_cylinder(S.segment(1.0, "dirichlet"))
    lhs = Ta(t, a * u, a * u)
    rhs = T1(t / a, u, u) / a
    assert abs(lhs - rhs) < 1e-10 * (1 + abs(rhs))


def test_errors():
    T = K.closed_form_cylinder(S.segment(1.0, "dirichlet"))
    with pytest.raises(NonPositiveTime):
        T(0.0, 0.3, 0.3)
    with pytest.raises(UnsupportedStencil):
        K.closed_form_cylinder(S.segment(1.0, "dirichlet"), (3, 0))
    with pytest.raises(KindMismatch):
        K.heat_from_product(T, T)
    with pytest.raises(UnsupportedForSpectralBacking):
        K.modified_from_cylinder(K.spectral_cylinder(S.segment_model(1.0, "dirichlet")))
    with pytest.raises(TailBoundUnreachable):
        K.spectral_cylinder(S.segment_model(1.0, "dirichlet"))(1e-9, 0.3, 0.3)
    with pytest.raises(UnsupportedDomain):
        K.modified_from_cylinder(K.closed_form_cylinder(S.free_space(1)))
