import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from zetavac.errors import (
    BothLogBearing,
    DomainViolation,
    LogAtResidueOrder,
    LogBearingInput,
    OrderNotRepresented,
    ZeroLeadingCoefficient,
)
from zetavac.laurent import (
    LogLaurentSeries as L,
    PiRational,
    coefficient,
    derivative,
    invert,
    lift_elementary,
    log_series,
    mul,
    residue,
)

tsym = sp.Symbol("t")


def exact_list(s, lo, hi):
    return [s.coefficient(k) for k in range(lo, hi)]


# examples ----------------------------------------------------------------------

def test_mul_polynomial_identity():
    a = L.from_coeffs([1, 1], -1, truncation_order=4)
    b = L.from_coeffs([-1, 1], 0, truncation_order=5)
    p = mul(a, b)
    assert p.coefficient(-1) == -1 and p.coefficient(0) == 0 and p.coefficient(1) == 1
    assert p.min_order == -1 and p.truncation_order == min(-1 + 5, 0 + 4)


def test_mul_zero():
    z = L.zero(0, 6)
    a = L.from_coeffs([Fraction(3), 2, 1], -2, truncation_order=5)
    p = z * a
    assert all(c == 0 for c in p.plain_coeffs)


def test_invert_examples():
    inv = invert(L.variable(Fraction(1), 6))
    assert inv.min_order == -1 and inv.coefficient(-1) == 1
    g = invert(L.from_coeffs([1, 1], 0, truncation_order=6))
    assert exact_list(g, 0, 6) == [1, -1, 1, -1, 1, -1]


def test_invert_exp_minus_one_residue_float():
    em1 = (lift_elementary("exp", L.variable(math.pi, 10)) - 1).normalized()
    r = invert(em1)
    assert abs(r.coefficient(-1) - 1 / math.pi) < 1e-15
    # numeric oracle for the constant term: 1/(e^{pi t} - 1) - 1/(pi t) -> -1/2
    t = 1e-6
    assert abs((1 / math.expm1(math.pi * t) - 1 / (math.pi * t)) - r.coefficient(0)) < 1e-5


def test_residue_examples():
    assert residue(L.monomial(-1, 1)) == 1
    u = L.variable(Fraction(1), 10)
    T = invert((lift_elementary("exp", u) - 1).normalized())  # 1/(e^u - 1), u = pi t scaled below
    # t^-2 / (e^{pi t} - 1): coefficient of t^1 of 1/(e^u-1) is 1/12, times pi
    assert T.coefficient(1) == Fraction(1, 12)
    Tf = T.to_float().rescale(math.pi)
    assert abs(residue(Tf.shift(-2)) - math.pi / 12) < 1e-14


def test_residue_errors():
    with pytest.raises(OrderNotRepresented):
        residue(L.from_coeffs([1], -3, truncation_order=-1))
    with pytest.raises(LogAtResidueOrder):
        residue(L.log_term(-1, 1))
    assert residue(L.from_coeffs([1], 0, truncation_order=4)) == 0


def test_lift_examples():
    e = lift_elementary("exp", L.zero(1, 6))
    assert exact_list(e, 0, 6) == [1, 0, 0, 0, 0, 0]
    c = lift_elementary("cos", L.variable(math.pi, 6))
    assert abs(c.coefficient(2) + math.pi**2 / 2) < 1e-14


def test_lift_errors():
    with pytest.raises(DomainViolation):
        lift_elementary("cos", L.from_coeffs([1, 1], 0))
    with pytest.raises(DomainViolation):
        lift_elementary("log1p", L.monomial(-1, 1))
    with pytest.raises(DomainViolation):
        lift_elementary("tan", L.variable())
    with pytest.raises(DomainViolation):
        lift_elementary("exp", L.log_term(1))
    with pytest.raises(DomainViolation):
        lift_elementary("exp", L.from_coeffs([Fraction(2)], 0, truncation_order=4))


def test_exp_constant_split_float():
    s = lift_elementary("exp", L.from_coeffs([0.5, 1.0], 0, truncation_order=5))
    for k in range(5):
        assert abs(s.coefficient(k) - math.exp(0.5) / math.factorial(k)) < 1e-14


def test_errors_invert_and_mul():
    with pytest.raises(ZeroLeadingCoefficient):
        invert(L(0, (0.0, 1.0), (0.0, 0.0), 2))
    with pytest.raises(LogBearingInput):
        invert(L.log_term(0))
    with pytest.raises(BothLogBearing):
        mul(L.log_term(0), L.log_term(1))


def test_float_leading_zero_tolerance():
    s = L(0, (1e-17, 1.0, 2.0), (0.0, 0.0, 0.0), 3)
    assert s.normalized().min_order == 1
    inv = invert(s.normalized())
    assert inv.min_order == -1


# sympy oracles -----------------------------------------------------------------------

@pytest.mark.parametrize(
    "build,expr",
    [
        (lambda u: invert((lift_elementary("exp", u) - 1).normalized()), 1 / (sp.exp(tsym) - 1)),
        (lambda u: lift_elementary("sinh", u * Fraction(1, 2)) * invert((lift_elementary("cosh", u) - 1 + Fraction(1, 2)).normalized()),
         sp.sinh(tsym / 2) / (sp.cosh(tsym) - 1 + sp.Rational(1, 2))),
        (lambda u: lift_elementary("log1p", u + u * u), sp.log(1 + tsym + tsym**2)),
        (lambda u: lift_elementary("sin", u) * lift_elementary("cos", u), sp.sin(tsym) * sp.cos(tsym)),
        (lambda u: invert(lift_elementary("sinh", u).normalized()) * lift_elementary("cosh", u), sp.cosh(tsym) / sp.sinh(tsym)),
    ],
)
def test_exact_series_vs_sympy(build, expr):
    u = L.variable(Fraction(1), 10)
    s = build(u)
    assert s.exact
    ser = sp.series(expr, tsym, 0, s.truncation_order).removeO()
    for k in s.orders:
        want = sp.Rational(sp.expand(ser).coeff(tsym, k)) if k != 0 else sp.Rational(sp.expand(ser).subs(tsym, 0) if s.min_order >= 0 else sp.expand(ser - sum(sp.expand(ser).coeff(tsym, j) * tsym**j for j in range(s.min_order, 0))).subs(tsym, 0))
        assert s.coefficient(k) == Fraction(int(want.p), int(want.q)), k


def test_mul_vs_numeric_sampling():
    # 1/(e^{pi t}-1) * t compared with samples at small t
    u = L.variable(math.pi, 12)
    s = invert((lift_elementary("exp", u) - 1).normalized()) * L.variable(1.0, 12)
    for t in np.linspace(0.01, 0.05, 20):
        direct = t / math.expm1(math.pi * t)
        assert abs(s.evaluate(t) - direct) < 1e-12


def test_division_structure_vs_complex_samples():
    u = L.variable(math.pi, 14)
    num = lift_elementary("sinh", u * 0.5)
    den = (lift_elementary("cosh", u) - 1 + 2 * 0.3).normalized()
    s = num * invert(den)
    for k in range(8):
        t = 1e-2 * cmath.exp(1j * 2 * math.pi * k / 8)
        direct = cmath.sinh(math.pi * t / 2) / (cmath.cosh(math.pi * t) - 1 + 0.6)
        assert abs(s.evaluate(t) - direct) < 1e-12


# properties -------------------------------------------------------------------------

coef = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def exact_series(draw, min_lo=-3, max_lo=3):
    lo = draw(st.integers(min_lo, max_lo))
    cs = draw(st.lists(coef, min_size=3, max_size=7))
    return L.from_coeffs(cs, lo)


@settings(max_examples=60, deadline=None)
@given(exact_series(), exact_series(), exact_series())
def test_mul_assoc_commut(a, b, c):
    ab = a * b
    ba = b * a
    assert ab == ba
    l = (a * b) * c
    r = a * (b * c)
    lo = max(l.min_order, r.min_order)
    hi = min(l.truncation_order, r.truncation_order)
    for k in range(lo, hi):
        assert l.coefficient(k) == r.coefficient(k)


@settings(max_examples=60, deadline=None)
@given(exact_series())
def test_invert_two_sided(a):
    a = a.normalized()
    if not a.plain_coeffs:
        return
    one = a * invert(a)
    assert one.coefficient(0) == 1
    assert all(one.coefficient(k) == 0 for k in range(1, one.truncation_order))


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=2, max_size=6))
def test_exp_log1p_roundtrip(cs):
    a = L.from_coeffs(cs, 1)
    back = lift_elementary("exp", lift_elementary("log1p", a))
    for k in range(back.truncation_order):
        want = (1 if k == 0 else 0) + a.coefficient(k) if k >= 1 else 1
        assert back.coefficient(k) == want


@settings(max_examples=60, deadline=None)
@given(exact_series())
def test_residue_of_derivative_zero(a):
    d = derivative(a)
    if d.truncation_order > -1:
        assert residue(d) == 0


@settings(max_examples=60, deadline=None)
@given(exact_series(), exact_series(), coef, coef)
def test_coefficient_linear(a, b, alpha, beta):
    s = a * alpha + b * beta
    for k in s.orders:
        assert coefficient(s, k) == alpha * a.coefficient(k) + beta * b.coefficient(k)


def test_log_channel_derivative_and_log_series():
    s = L.log_term(0, 1, 4)  # ln t
    d = derivative(s)
    assert d.coefficient(-1) == 1 and not d.has_log
    ls = log_series(L.from_coeffs([Fraction(1), Fraction(1)], 1, truncation_order=6))  # ln(t + t^2)
    assert ls.log_coefficient(0) == 1
    assert ls.coefficient(1) == 1 and ls.coefficient(2) == Fraction(-1, 2)


def test_truncation_never_extends():
    a = L.from_coeffs([1, 2, 3], 0, truncation_order=3)
    b = L.from_coeffs([1, 2, 3, 4, 5, 6], 0)
    assert (a + b).truncation_order == 3
    assert (a * b).truncation_order == 3
    with pytest.raises(OrderNotRepresented):
        (a * b).coefficient(3)


def test_pi_rational():
    x = PiRational(Fraction(1, 6), 1)
    assert str(x) == "1/6*pi"
    assert (x * x).pi_power == 2
    assert float(x - x) == 0.0
    assert abs(float(x) - math.pi / 6) < 1e-16
