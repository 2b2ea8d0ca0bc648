"""Analytic continuation of Dirichlet kernels D_s and traces in s.

Two routes are implemented:

* residues of small-t expansions (exact at integer and half-integer
  points, no quadrature),
* Mellin transforms continued by integration by parts, evaluated by
  adaptive quadrature.

Conventions: for a kernel K(t) ~ t^-rho H(t) with H smooth at 0,

    M(sigma) = int_0^inf t^(sigma - 1) K(t) dt
             = (-1)^n / ((sigma-rho)...(sigma-rho+n-1)) int_0^inf t^(sigma-rho+n-1) H^(n)(t) dt

and D_s = M(2s)/Gamma(2s) for the cylinder kernel, M(s)/Gamma(s) for the
heat kernel.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import rgamma

from .errors import (
    LimitNotConverged,
    LogAtResidueOrder,
    PoleAtSigma,
    QuadratureNotConverged,
    UnsupportedMode,
)
from .kernels import KernelExpansion
from .laurent import LogLaurentSeries, PiRational, lift_elementary, residue

EULER_GAMMA = float(mpmath.euler)
CAUCHY_POINTS = 64
T_ORIGIN = 1e-30


# numerical differentiation ----------------------------------------------------

def cauchy_derivative(f: Callable, t, n: int, radius: float, points: int = CAUCHY_POINTS):
    """n-th derivative of an analytic f at real t by the trapezoid rule on a
    circle of the given radius (f must accept complex arrays)."""
    if n == 0:
        return f(np.asarray(t, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    phi = 2.0 * math.pi * np.arange(points) / points
    z = t[:, None] + radius * np.exp(1j * phi)[None, :]
    vals = f(z)
    w = np.exp(-1j * n * phi)[None, :]
    out = math.factorial(n) * np.mean(vals * w, axis=1) / radius**n
    return np.real(out)


def fd_derivative(f: Callable, t, n: int, h: float | None = None):
    """Central finite differences of order n (fallback for non-analytic f)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if n == 0:
        return f(t)
    if h is None:
        h = 1e-16 ** (1.0 / (n + 2)) * np.maximum(1.0, np.abs(t))
    k = np.arange(n + 1)
    coeffs = np.array([(-1) ** (n - j) * math.comb(n, j) for j in k], dtype=float)
    total = 0.0
    for j, cj in zip(k, coeffs):
        total = total + cj * f(t + (j - n / 2.0) * h)
    return total / h**n


# Mellin transforms -------------------------------------------------------------

@dataclass(frozen=True)
class MellinSpec:
    """K(t) = integrand(t); H(t) = t^rho K(t) must be smooth at t = 0.

    ``analytic_radius`` is a lower bound on the distance from the positive
    real axis to the nearest singularity of H (enables contour
    differentiation); ``decay_rate`` an exponential decay rate of K at
    large t (None for power-law tails).
    """

    integrand: Callable
    rho: float = 0.0
    gamma_convention: str = "cylinder"
    analytic_radius: float | None = None
    decay_rate: float | None = None

    def H(self, t):
        if np.ndim(t) == 0 and t == 0:
            # H extends continuously to t = 0; quadrature rules may sample it there
            t = T_ORIGIN
        return t**self.rho * self.integrand(t)

    def H_deriv(self, t, n: int):
        if n == 0:
            return self.H(np.asarray(t, dtype=float))
        if self.analytic_radius:
            return cauchy_derivative(self.H, t, n, 0.5 * self.analytic_radius)
        return fd_derivative(self.H, t, n)


def ibp_poles(rho, n: int) -> list:
    return [rho - j for j in range(n)]


def _quad(fn, lo, hi, weight=None, wvar=None, budget: float = 1e-11):
    """quad with tight tolerances; a QUADPACK warning is only fatal when the
    reported error exceeds the budget (relative to max(1, |value|))."""
    kw = dict(epsabs=1e-15, epsrel=1e-13, limit=400)
    if weight is not None:
        kw.update(weight=weight, wvar=wvar)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        val, err = quad(fn, lo, hi, **kw)
    if caught and not (np.isfinite(val) and err <= budget * max(1.0, abs(val))):
        raise QuadratureNotConverged(f"{caught[0].message} (error estimate {err:.3g})")
    return val, err


def _t_max(decay_rate: float, alpha: float) -> float:
    # e^{-lambda t} t^(alpha + 2) below 1e-18 relative
    t = max(2.0, 45.0 / decay_rate)
    for _ in range(50):
        nt = (45.0 + max(alpha + 2.0, 0.0) * math.log(t)) / decay_rate
        if abs(nt - t) < 1e-6:
            break
        t = max(nt, 2.0)
    return max(t, 2.0)


def mellin_ibp(spec: MellinSpec, n: int, sigma) -> complex:
    """Continued Mellin transform M(sigma) after n integrations by parts.

    Valid for Re sigma > rho - n and sigma not in {rho, rho-1, ..., rho-n+1}.
    """
    rho = spec.rho
    for p in ibp_poles(rho, n):
        if abs(sigma - p) < 1e-14:
            raise PoleAtSigma(p)
    alpha = sigma - rho + n - 1
    if (alpha.real if isinstance(alpha, complex) else alpha) <= -1:
        raise QuadratureNotConverged(f"integral diverges at t = 0 for sigma = {sigma} with n = {n}")
    a_re = float(np.real(alpha))
    a_im = float(np.imag(alpha))

    def hn(t):
        return float(np.real(np.atleast_1d(spec.H_deriv(t, n))[0]))

    def parts(phase_fn):
        re0, _ = _quad(lambda t: hn(t) * phase_fn(t).real, 0.0, 1.0, weight="alg", wvar=(a_re, 0.0))
        im0 = 0.0
        if a_im:
            im0, _ = _quad(lambda t: hn(t) * phase_fn(t).imag, 0.0, 1.0, weight="alg", wvar=(a_re, 0.0))
        if spec.decay_rate:
            hi = _t_max(spec.decay_rate, a_re)
        else:
            hi = np.inf
        re1, _ = _quad(lambda t: t**a_re * hn(t) * phase_fn(t).real, 1.0, hi)
        im1 = 0.0
        if a_im:
            im1, _ = _quad(lambda t: t**a_re * hn(t) * phase_fn(t).imag, 1.0, hi)
        return complex(re0 + re1, im0 + im1)

    integral = parts(lambda t: cmath.exp(1j * a_im * math.log(t)) if a_im else complex(1.0))
    poch = 1.0
    for j in range(n):
        poch *= sigma - rho + j
    val = (-1) ** n * integral / poch
    return val.real if not isinstance(sigma, complex) and abs(val.imag) == 0 else val


def neville(xs: Sequence[float], ys: Sequence, x0: float = 0.0):
    """Polynomial extrapolation to x0; returns (value, error estimate)."""
    p = [complex(y) for y in ys]
    n = len(xs)
    prev = None
    best = p[0]
    for m in range(1, n):
        for i in range(n - m):
            p[i] = ((x0 - xs[i + m]) * p[i] + (xs[i] - x0) * p[i + 1]) / (xs[i] - xs[i + m])
        prev, best = best, p[0]
    err = abs(best - prev) if prev is not None else float("inf")
    return best, err


def _gamma_conv_sigma(spec: MellinSpec, s):
    return 2 * s if spec.gamma_convention == "cylinder" else s


def dirichlet_continued(spec: MellinSpec, s, n: int | None = None, ladder: Sequence[float] | None = None):
    """D_s = M(sigma)/Gamma(sigma) by quadrature.

    When sigma is a nonpositive integer the ratio is a 0/0 limit; it is
    taken by evaluating at sigma + h on a ladder of h > 0 and extrapolating
    to h = 0. Returns (value, error estimate).
    """
    sigma = _gamma_conv_sigma(spec, s)
    rho = spec.rho
    at_gamma_pole = float(np.imag(sigma)) == 0 and float(np.real(sigma)) <= 0 and float(np.real(sigma)) == round(float(np.real(sigma)))
    if n is None:
        n = max(0, int(math.ceil(float(np.real(rho - sigma)) + (0 if at_gamma_pole else 1e-9))))
        if not at_gamma_pole:
            while float(np.real(sigma - rho)) + n - 1 <= -1 or any(abs(sigma - p) < 1e-12 for p in ibp_poles(rho, n)):
                n += 1
    if not at_gamma_pole:
        return mellin_ibp(spec, n, sigma) * float(rgamma(sigma)), 0.0
    if ladder is None:
        ladder = [0.4 / 2**k for k in range(9)]
    vals = []
    for h in ladder:
        m = mellin_ibp(spec, n, sigma + h)
        vals.append(m * float(rgamma(sigma + h)))
    val, err = neville(list(ladder), vals)
    return val.real, err


def _ibp_integral(spec: MellinSpec, n: int, alpha: float, with_log: bool = False) -> float:
    """int_0^inf t^alpha (ln t)^[with_log] H^(n)(t) dt for real alpha > -1."""

    def hn(t):
        return float(np.real(np.atleast_1d(spec.H_deriv(t, n))[0]))

    weight = "alg-loga" if with_log else "alg"
    lo, _ = _quad(hn, 0.0, 1.0, weight=weight, wvar=(alpha, 0.0))
    hi = _t_max(spec.decay_rate, alpha) if spec.decay_rate else np.inf
    if with_log:
        up, _ = _quad(lambda t: t**alpha * math.log(t) * hn(t), 1.0, hi)
    else:
        up, _ = _quad(lambda t: t**alpha * hn(t), 1.0, hi)
    return lo + up


def mellin_laurent_at_pole(spec: MellinSpec, sigma0: int, n: int | None = None) -> tuple[float, float]:
    """(c, M0) with M(sigma0 + u) = c/u + M0 + O(u) at a real pole sigma0.

    Uses n integrations by parts with sigma0 among the listed poles, so
    that M = (-1)^n I(sigma)/((sigma - sigma0) Q(sigma)) with I analytic;
    I and I' are plain and log-weighted quadratures.
    """
    rho = spec.rho
    if n is None:
        n = int(math.ceil(rho - sigma0)) + 1
    j0 = rho - sigma0
    if j0 != int(j0) or not (0 <= j0 < n):
        raise ValueError(f"sigma0 = {sigma0} is not an integration-by-parts pole for n = {n}")
    alpha = sigma0 - rho + n - 1
    if alpha <= -1:
        raise QuadratureNotConverged(f"integral diverges at t = 0 for n = {n}")
    others = [sigma0 - rho + j for j in range(n) if j != int(j0)]
    Q0 = float(np.prod(others)) if others else 1.0
    S = sum(1.0 / v for v in others)
    I0 = _ibp_integral(spec, n, alpha)
    I1 = _ibp_integral(spec, n, alpha, with_log=True)
    sign = (-1) ** n
    return sign * I0 / Q0, sign * (I1 - I0 * S) / Q0


def regular_part(
    spec: MellinSpec,
    sigma0: int,
    prefactor: LogLaurentSeries,
    pole_residue: float | None = None,
    n: int | None = None,
) -> "RegularPart":
    """Regular part at u = 0 of A(u) M(sigma0 + u) where A is analytic
    (given as a u-series) and M(sigma0 + u) = c/u + M0 + O(u).

    Returns RP = A0 M0 + A1 c and the pole coefficient A0 c. When A0 = 0
    and c is supplied (from a series coefficient) no quadrature is done.
    """
    if any(abs(prefactor.coefficient(k)) > 0 for k in range(prefactor.min_order, 0)):
        raise LimitNotConverged("prefactor with a pole is not supported")
    A0 = complex(prefactor.coefficient(0)).real
    A1 = complex(prefactor.coefficient(1)).real
    if abs(A0) <= 1e-15 and pole_residue is not None:
        return RegularPart(A1 * pole_residue, 0.0, 0, "residue")
    c_q, M0 = mellin_laurent_at_pole(spec, sigma0, n)
    c = c_q if pole_residue is None else pole_residue
    pole = A0 * c
    return RegularPart(A0 * M0 + A1 * c, pole, 1 if abs(pole) > 1e-14 else 0, "quadrature", abs(c_q - c))


@dataclass(frozen=True)
class RegularPart:
    value: float
    pole_coefficient: float  # coefficient of 1/u, equal to the ln(kappa) coefficient
    pole_order: int
    method: str
    error_estimate: float = 0.0  # mismatch between quadrature and series residues


# residue routes -------------------------------------------------------------------

def _coef(expansion: KernelExpansion, k: int, exact: bool):
    if exact:
        if expansion.exact is None:
            raise ValueError("expansion has no exact form")
        return expansion.exact.coefficient(k)
    series = expansion.series
    g = series.log_coefficient(k) if series.represents(k) else 0
    if g != 0 and abs(g) > 1e-14 * max(series.scale_of(), 1.0):
        raise LogAtResidueOrder(f"ln t term at order {k}: the value depends on the mass scale")
    return series.coefficient(k)


def _as_expansion(obj) -> KernelExpansion:
    if isinstance(obj, LogLaurentSeries):
        return KernelExpansion(obj, None)
    return obj


def hankel_residue_D(expansion, n: int, exact: bool = False):
    """D_{-n/2} = (-1)^n n! Res(t^-(n+1) T; 0) for n >= 0."""
    if n < 0:
        raise ValueError("hankel_residue_D needs n >= 0")
    e = _as_expansion(expansion)
    val = _coef(e, n, exact)
    f = (-1) ** n * math.factorial(n)
    return val * f if exact else complex(val) * f


def hankel_residue_Dtilde(expansion, n: int, exact: bool = False):
    """D_{-n/2} = (-1)^(n+1) (n+1)! Res(t^-(n+2) T~; 0) for n >= -1."""
    if n < -1:
        raise ValueError("hankel_residue_Dtilde needs n >= -1")
    e = _as_expansion(expansion)
    val = _coef(e, n + 1, exact)
    f = (-1) ** (n + 1) * math.factorial(n + 1)
    return val * f if exact else complex(val) * f


def trace_residue(trace_expansion, n: int = 1, exact: bool = False):
    """Tr A^(n/2) = (-1)^n n! Res(t^-(n+1) T(t); 0)."""
    return hankel_residue_D(trace_expansion, n, exact)


# epsilon deformation ---------------------------------------------------------------

@dataclass(frozen=True)
class DeformationMode:
    mode: str = "sqrt_shift"
    epsilon: float = 0.0


def deformed_residue(expansion, eps: float, n: int, which: str = "cylinder") -> complex:
    """Residue formula applied to e^(-eps t) times the kernel series."""
    e = _as_expansion(expansion)
    series = e.series
    damp = lift_elementary("exp", LogLaurentSeries.variable(-eps, series.truncation_order - series.min_order + 2))
    prod = series * damp
    if which == "cylinder":
        return hankel_residue_D(KernelExpansion(prod, e.point), n)
    return hankel_residue_Dtilde(KernelExpansion(prod, e.point), n)


def eps_deformed_limit(
    expansion,
    mode: DeformationMode | str = "sqrt_shift",
    n: int = 1,
    ladder: Sequence[float] = (0.1, 0.01, 0.001),
    which: str = "cylinder",
    tol: float = 1e-9,
) -> complex:
    """eps -> 0 limit of the residue values of the deformed kernel
    e^(-eps t) T; only the (sqrt(A) + eps)^2 deformation factorizes this way."""
    name = mode.mode if isinstance(mode, DeformationMode) else str(mode)
    if name != "sqrt_shift":
        raise UnsupportedMode(f"deformation mode {name!r} is not supported")
    vals = [deformed_residue(expansion, e, n, which) for e in ladder]
    # the deformed residue is a polynomial in eps whose degree is bounded by
    # the distance between the residue order and the leading order
    lead = _as_expansion(expansion).series.leading_order()
    lead = n if lead is None else lead
    degree = (n if which == "cylinder" else n + 1) - lead
    if len(ladder) > degree:
        val, _ = neville(list(ladder[: degree + 1]), vals[: degree + 1])
        return val
    val, err = neville(list(ladder), vals)
    if not np.isfinite(err) or err > tol * max(1.0, abs(val)):
        raise LimitNotConverged(f"epsilon ladder did not settle (estimate {err})")
    return val


# gamma prefactor ---------------------------------------------------------------------

def harmonic(m: int) -> Fraction:
    return sum((Fraction(1, k) for k in range(1, m + 1)), Fraction(0))


@dataclass(frozen=True)
class GammaPrefactorExpansion:
    """kappa^(2s-n) e^(-2 i pi s) Gamma(1-2s) t^(2s-1) around u = 2s - n = 0:

        t^(n-1)/(n-1)! [1/u + (ln(kappa t) + gamma_EM - i pi - H_(n-1)) + O(u)]
    """

    n: int
    kappa: float
    pole: float  # 1/(n-1)!, multiplies t^(n-1)/u
    finite_constant: complex  # (ln kappa + gamma_EM - i pi - H_(n-1))/(n-1)!
    finite_log: float  # 1/(n-1)!, multiplies t^(n-1) ln t

    def finite_series(self, truncation_order: int | None = None) -> LogLaurentSeries:
        k = self.n - 1
        return LogLaurentSeries.from_coeffs(
            [self.finite_constant], k, log_coeffs=[self.finite_log],
            truncation_order=truncation_order if truncation_order is not None else k + 1,
        )

    def evaluate(self, u: complex, t: complex) -> complex:
        k = self.n - 1
        return t**k * (self.pole / u + self.finite_constant + self.finite_log * cmath.log(t))


def gamma_prefactor_expansion(n: int, kappa: float = 1.0, t_power: int | None = None) -> GammaPrefactorExpansion:
    """Pole and finite part at u = 0; the t power is always n - 1."""
    if n < 1:
        raise ValueError("gamma_prefactor_expansion needs n >= 1")
    if t_power is not None and t_power != n - 1:
        raise ValueError(f"the expansion multiplies t^{n - 1}, not t^{t_power}")
    f = 1.0 / math.factorial(n - 1)
    const = (math.log(kappa) + EULER_GAMMA - 1j * math.pi - float(harmonic(n - 1))) * f
    return GammaPrefactorExpansion(n, kappa, f, const, f)


def exact_gamma_prefactor(n: int, kappa: float, u: complex, t: complex) -> complex:
    """Direct value of kappa^(2s-n) e^(-2 i pi s) Gamma(1-2s) t^(2s-1) at u (oracle)."""
    s = (u + n) / 2
    return complex(kappa ** (2 * s - n) * mpmath.exp(-2j * mpmath.pi * s) * mpmath.gamma(1 - 2 * s) * mpmath.power(t, 2 * s - 1))


# kappa-dependent branch --------------------------------------------------------------

def kappa_dependent_value(
    cyl_expansion: KernelExpansion,
    spec: MellinSpec,
    n: int,
    kappa: float = 1.0,
) -> "KappaDependentValue":
    """RP at s = n/2 of kappa^(2s-n) D_s for n >= 1, where D_s has a pole.

    With u = 2s - n, D_s = M(n + u)/Gamma(n + u), M(n + u) = c/u + M0 and c
    the t^-n coefficient of T. The ln(kappa) coefficient c/(n-1)! matches
    the pole part of the gamma prefactor expansion.
    """
    gp = gamma_prefactor_expansion(n, kappa)
    c = complex(cyl_expansion.series.coefficient(-n)).real
    ln_k_coef = gp.pole * c
    # A(u) = kappa^u / Gamma(n + u) as a u-series
    W = 4
    u = LogLaurentSeries.variable(1.0, W)
    kap = lift_elementary("exp", u * math.log(kappa))
    rg = LogLaurentSeries.from_coeffs(_rgamma_taylor(n, W), 0, truncation_order=W)
    A = kap * rg
    rp = regular_part(spec, n, A, c)
    return KappaDependentValue(rp.value, ln_k_coef, kappa, rp.method, rp.error_estimate)


def _rgamma_taylor(z0: float, count: int) -> list:
    return analytic_taylor(lambda u: mpmath.rgamma(z0 + u), count)


def analytic_taylor(f: Callable, count: int, radius: float = 0.25) -> list:
    """First ``count`` Taylor coefficients at 0 of an analytic f (removable
    singularities allowed) by contour integration at 30 digits."""
    with mpmath.workdps(30):
        coeffs = mpmath.taylor(f, 0, count - 1, method="quad", radius=mpmath.mpf(radius))
    return [float(mpmath.re(c)) for c in coeffs]


@dataclass(frozen=True)
class KappaDependentValue:
    value: float
    ln_kappa_coefficient: float
    kappa: float
    method: str
    error_estimate: float = 0.0


# Mellin specs for segment kernels and traces ---------------------------------------

def kernel_mellin_spec(domain, x, y=None, stencil=(0, 0)) -> MellinSpec:
    """Cylinder kernel T(t; x, y) (with a derivative stencil) on a segment as
    a Mellin integrand; rho is the order of its t = 0 pole."""
    from .kernels import segment_kernel_analytic, segment_scale, singularity_distance

    if domain.kind != "segment":
        raise ValueError("kernel Mellin specs are built for segments")
    y = x if y is None else y
    a, bc = domain.a, domain.bc
    c, _ = segment_scale(a, bc)
    rho = 1 + stencil[0] + stencil[1] if abs(x - y) < 1e-15 else 0
    omega1 = (0.5 if bc == "dirichlet_neumann" else 1.0) * (2.0 if bc == "periodic" else 1.0) * math.pi / a
    return MellinSpec(
        lambda t: segment_kernel_analytic("cylinder", t, x, y, a, bc, stencil),
        rho=rho,
        gamma_convention="cylinder",
        analytic_radius=singularity_distance(a, bc, x, y),
        decay_rate=0.5 * omega1,
    )


def trace_mellin_spec(domain) -> MellinSpec:
    """Closed-form segment cylinder trace as a Mellin integrand (rho = 1)."""
    from .kernels import segment_scale

    if domain.kind != "segment":
        raise ValueError("trace Mellin specs are built for segments")
    c, _ = segment_scale(domain.a, domain.bc)
    bc = domain.bc

    def T(t):
        u = c * t
        if bc == "periodic":
            return 2.0 / np.expm1(u)
        if bc == "dirichlet_neumann":
            return np.exp(u / 2) / np.expm1(u)
        return 1.0 / np.expm1(u)

    # poles of t T(t) at c t = 2 pi i k, k != 0
    return MellinSpec(T, rho=1, gamma_convention="cylinder", analytic_radius=2.0 * math.pi / c, decay_rate=0.5 * c)


# renormalized kernels ----------------------------------------------------------------

DD_STENCILS = ((1, 1), (2, 0))


@dataclass(frozen=True)
class RenormalizedKernelSet:
    """D_{-1/2}(x,x) and derivative values of D_{1/2}(x,x) at one point.

    ``exact_values`` holds pi-rational forms when built in exact mode.
    """

    at_point: object
    d_minus_half: complex
    dd_plus_half: dict
    d_plus_half: KappaDependentValue | complex | None = None
    kappa_dependent: bool = False
    kappa: float = 1.0
    method: str = "residue"
    exact_values: dict | None = None


def renormalized_kernel_set(
    domain,
    x,
    kappa: float = 1.0,
    exact: bool = False,
    order: int = 8,
    with_d_plus_half: bool = False,
) -> RenormalizedKernelSet:
    """Residue-route renormalized kernels at the diagonal point x.

    D_{-1/2} and the derivative stencils of D_{1/2} carry no ln t at the
    residue order, so they are kappa independent. D_{1/2} itself is
    kappa dependent on segments; it is only computed on request.
    """
    from .kernels import closed_form_cylinder, expand_at_zero, modified_from_cylinder

    T = closed_form_cylinder(domain)
    eT = expand_at_zero(T, x, order=order, exact=exact)
    dmh = hankel_residue_D(eT, 1, exact=exact)
    dd = {}
    exact_values = {"d_minus_half": dmh} if exact else None
    if domain.kind == "free_space" and domain.d < 2:
        dd = {st: complex(0.0) for st in DD_STENCILS}
    else:
        Tt = modified_from_cylinder(T)
        for st in DD_STENCILS:
            e = expand_at_zero(Tt.with_stencil(st), x, order=order, exact=exact)
            v = hankel_residue_Dtilde(e, -1, exact=exact)
            if exact:
                exact_values[st] = v
                v = complex(float(v))
            dd[st] = v
    if exact:
        dmh = complex(float(dmh))
    dph = None
    kdep = False
    if with_d_plus_half:
        Tt0 = modified_from_cylinder(T)
        e0 = expand_at_zero(Tt0, x, order=order)
        try:
            dph = hankel_residue_Dtilde(e0, -1)
        except LogAtResidueOrder:
            if domain.kind != "segment":
                raise
            dph = kappa_dependent_value(expand_at_zero(T, x, order=order), kernel_mellin_spec(domain, float(x)), 1, kappa)
            kdep = True
    return RenormalizedKernelSet(x, dmh, dd, dph, kdep, kappa, "residue", exact_values)
