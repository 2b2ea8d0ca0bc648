"""Heat, cylinder and modified cylinder kernels.

Three backings are offered:

* spectral sums over a :class:`SpectralModel` with a geometric tail bound,
* closed forms for segments (four boundary conditions), free space and
  the Dirichlet half space,
* exact small-t expansions (:class:`KernelExpansion`) of the closed forms
  on the diagonal, including derivative stencils.

Segment closed forms are written in the rescaled variable u = c t with
c = pi/a (2 pi/a for periodic) and image angles theta = c (x -/+ y). The
"geom" family (Dirichlet, Neumann, periodic) is built from

    g(u, theta) = (c / 2 pi) (sinh u / (cosh u - cos theta) - 1)
    f(u, theta) = -(1 / 2 pi) ln(1 - 2 e^-u cos theta + e^-2u)

and the Dirichlet-Neumann family from

    h(u, theta) = (c / pi) sinh(u/2) cos(theta/2) / (cosh u - cos theta)
    k(u, theta) = (1 / 2 pi) ln((cosh(u/2) + cos(theta/2)) / (cosh(u/2) - cos(theta/2)))

with g, h the cylinder blocks and f, k the modified (T = -dT~/dt) blocks.
Spatial derivatives follow from the chain rule on theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import (
    KindMismatch,
    NonPositiveTime,
    SeriesDomainViolation,
    TailBoundUnreachable,
    UnsupportedDimension,
    UnsupportedDomain,
    UnsupportedForSpectralBacking,
    UnsupportedStencil,
)
from .laurent import LogLaurentSeries, PiRational, invert, is_exact, lift_elementary, log_series
from .spectrum import DomainDescriptor, SpectralModel, as_model, normalize_bc

KINDS = ("heat", "cylinder", "modified_cylinder")
MAX_TERMS = 1_000_000
TAIL_SAFETY = 5.0
BOUNDARY_EPS = 1e-9
MAX_EXPANSION_ORDER = 16


# angles -------------------------------------------------------------------

def _frac_mod(nu, period):
    if is_exact(nu):
        nu = Fraction(nu)
        return nu - period * math.floor(nu / period)
    return math.fmod(float(nu), period) % period


def sinpi(nu) -> float:
    """sin(pi nu) with exact zeros and units at half-integers."""
    r = _frac_mod(nu, 2)
    if r * 2 == int(r * 2):
        return (0.0, 1.0, 0.0, -1.0)[int(r * 2)]
    return math.sin(math.pi * float(r))


def cospi(nu) -> float:
    r = _frac_mod(nu, 2)
    if r * 2 == int(r * 2):
        return (1.0, 0.0, -1.0, 0.0)[int(r * 2)]
    return math.cos(math.pi * float(r))


def exact_cospi(nu) -> Fraction | None:
    """cos(pi nu) when rational, else None (only denominators 1, 2, 3 qualify)."""
    if not is_exact(nu):
        return None
    r = _frac_mod(Fraction(nu), 2)
    table = {
        Fraction(0): 1, Fraction(1, 3): Fraction(1, 2), Fraction(1, 2): 0,
        Fraction(2, 3): Fraction(-1, 2), Fraction(1): -1, Fraction(4, 3): Fraction(-1, 2),
        Fraction(3, 2): 0, Fraction(5, 3): Fraction(1, 2),
    }
    if r in table:
        return Fraction(table[r])
    return None


@dataclass(frozen=True)
class Trig:
    """Trigonometric data of one image angle theta = pi nu.

    Quantities that are only needed for odd derivative orders (the sines
    themselves) may be None in exact mode when irrational.
    """

    ct: object  # cos theta
    st: object  # sin theta
    s2: object  # sin^2(theta/2)
    st2: object  # sin^2 theta
    cp: object  # cos(theta/2)
    sp: object  # sin(theta/2)
    sp2: object  # sin^2(theta/2) (alias of s2, kept for the half-angle family)
    cq2: object  # cos^2(theta/4)
    sq2: object  # sin^2(theta/4)

    @classmethod
    def of(cls, nu, exact: bool = False) -> "Trig":
        if exact:
            ct = exact_cospi(nu)
            cp = exact_cospi(Fraction(nu) / 2)
            st = _exact_or_none(nu, lambda v: exact_cospi(Fraction(1, 2) - v))
            sp = _exact_or_none(nu, lambda v: exact_cospi(Fraction(1, 2) - v / 2))
            if ct is None:
                s2 = st2 = None
            else:
                s2 = (1 - ct) / 2
                st2 = 1 - ct * ct
            if cp is None:
                cq2 = sq2 = None
            else:
                cq2 = (1 + cp) / 2
                sq2 = (1 - cp) / 2
            return cls(ct, st, s2, st2, cp, sp, s2, cq2, sq2)
        ct = cospi(nu)
        st = sinpi(nu)
        sh = sinpi(nu / 2)
        cp = cospi(nu / 2)
        s2 = sh * sh
        sq = sinpi(nu / 4)
        cq = cospi(nu / 4)
        return cls(ct, st, s2, st * st, cp, sh, s2, cq * cq, sq * sq)


def _exact_or_none(nu, fn):
    try:
        return fn(Fraction(nu))
    except TypeError:
        return None


# segment closed forms ------------------------------------------------------

SEGMENT_FAMILY = {
    "dirichlet": ("geom", (1, -1)),
    "neumann": ("geom", (1, 1)),
    "periodic": ("geom", (1, 0)),
    "dirichlet_neumann": ("dn", (1, -1)),
}


def segment_scale(a, bc: str):
    """(c, gamma) with c = pi * gamma the rescaling of t."""
    g = Fraction(2) / a if bc == "periodic" else Fraction(1) / a
    if not is_exact(a):
        g = float(g)
    return math.pi * float(g), g


def image_nus(x, y, a, bc: str):
    """Image angles as multiples of pi: (nu_minus, nu_plus)."""
    if bc == "periodic":
        return (Fraction(2) * (x - y) / a if is_exact(a) and is_exact(x) and is_exact(y) else 2.0 * (x - y) / a), None
    if all(is_exact(v) for v in (x, y, a)):
        return Fraction(x - y) / a, Fraction(x + y) / a
    return (x - y) / a, (x + y) / a


def _geom_block(kind: str, m: int, t, c: float, tr: Trig):
    t = np.asarray(t)
    u = c * t
    q = np.exp(-u)
    om = -np.expm1(-u)
    E = om * om + 4.0 * q * tr.s2
    if kind == "cylinder":
        if m == 0:
            return (c / math.pi) * q * (om - 2.0 * tr.s2) / E
        if m == 1:
            return -(c / math.pi) * tr.st * q * om * (1.0 + q) / E**2
        return -(c / math.pi) * om * (1.0 + q) * q * (tr.ct / E**2 - 4.0 * q * tr.st2 / E**3)
    if m == 0:
        return -(1.0 / (2.0 * math.pi)) * np.log(E)
    if m == 1:
        return -(1.0 / math.pi) * q * tr.st / E
    return -(1.0 / math.pi) * (q * tr.ct / E - 2.0 * q * q * tr.st2 / E**2)


def _dn_block(kind: str, m: int, t, c: float, tr: Trig):
    t = np.asarray(t)
    u = c * t
    q = np.exp(-u)
    r = np.exp(-u / 2)
    om = -np.expm1(-u)
    E = om * om + 4.0 * q * tr.sp2
    cp, sp, ct, st2 = tr.cp, tr.sp, tr.ct, tr.st2
    if kind == "cylinder":
        P = (c / math.pi) * r * om
        if m == 0:
            return P * cp / E
        if m == 1:
            return P * (-0.5 * sp / E - 2.0 * q * cp * tr.st / E**2)
        return P * (
            -0.25 * cp / E
            + 2.0 * q * (2.0 * tr.sp2 * cp) / E**2
            - 2.0 * q * cp * ct / E**2
            + 8.0 * q * q * cp * st2 / E**3
        )
    if m == 0:
        omr = -np.expm1(-u / 2)
        return (1.0 / (2.0 * math.pi)) * (
            np.log(omr * omr + 4.0 * r * tr.cq2) - np.log(omr * omr + 4.0 * r * tr.sq2)
        )
    if m == 1:
        return -(1.0 / math.pi) * r * (1.0 + q) * sp / E
    return -(1.0 / math.pi) * (1.0 + q) * r * cp * (E / 2.0 - 4.0 * q * tr.sp2) / E**2


def _check_stencil(stencil):
    a, b = stencil
    if a < 0 or b < 0 or a + b > 2:
        raise UnsupportedStencil(f"stencil {stencil} must have nonnegative orders with total <= 2")


def _near(v, w) -> bool:
    return abs(float(v) - float(w)) <= BOUNDARY_EPS


def dirichlet_endpoints(a, bc: str) -> tuple:
    if bc == "dirichlet":
        return (0, a)
    if bc == "dirichlet_neumann":
        return (0,)
    return ()


def _vanishes_at_boundary(x, y, a, bc, stencil) -> bool:
    ends = dirichlet_endpoints(a, bc)
    if stencil[0] == 0 and any(_near(x, e) for e in ends):
        return True
    if stencil[1] == 0 and any(_near(y, e) for e in ends):
        return True
    return False


def segment_kernel(kind: str, t, x, y, a, bc: str, stencil=(0, 0)):
    """Closed-form cylinder or modified cylinder kernel on (0, a)."""
    _check_stencil(stencil)
    if kind not in ("cylinder", "modified_cylinder"):
        raise UnsupportedDomain(f"no closed-form {kind} kernel for segments; use heat_kernel")
    t_arr = np.asarray(t)
    if np.any(np.real(t_arr) <= 0):
        raise NonPositiveTime("segment kernels need Re t > 0")
    return segment_kernel_analytic(kind, t_arr, x, y, a, bc, stencil)


def segment_kernel_analytic(kind: str, t, x, y, a, bc: str, stencil=(0, 0)):
    """Same as :func:`segment_kernel` without the Re t > 0 check, for
    evaluation on complex contours."""
    t_arr = np.asarray(t)
    if _vanishes_at_boundary(x, y, a, bc, stencil):
        return np.zeros_like(t_arr, dtype=float) if t_arr.ndim else 0.0
    family, signs = SEGMENT_FAMILY[bc]
    c, _ = segment_scale(a, bc)
    block = _geom_block if family == "geom" else _dn_block
    m = stencil[0] + stencil[1]
    nus = image_nus(float(x), float(y), float(a), bc)
    total = 0.0
    for nu, s, sig in zip(nus, signs, (-1, 1)):
        if s == 0:
            continue
        tr = Trig.of(nu)
        total = total + s * c**m * sig ** stencil[1] * block(kind, m, t_arr, c, tr)
    return total


def singularity_distance(a, bc: str, x, y) -> float:
    """Distance from the real t axis to the nearest pole of t T(t; x, y)
    other than t = 0 (poles sit where cosh(ct) = cos(angle) for each image)."""
    bc = normalize_bc(bc)
    family, signs = SEGMENT_FAMILY[bc]
    c, _ = segment_scale(float(a), bc)
    best = 2.0 * math.pi
    for nu, s in zip(image_nus(float(x), float(y), float(a), bc), signs):
        if s == 0 or nu is None:
            continue
        r = (math.pi * float(nu)) % (2.0 * math.pi)
        dist = min(r, 2.0 * math.pi - r)
        if dist > 1e-12:
            best = min(best, dist)
    return best / c


# free space ---------------------------------------------------------------

def _as_vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def _radial_stencil(F0, F1, F2, delta1: float, stencil):
    """d^alpha_x1 d^beta_y1 of F(rho), rho = |x - y|^2, given F, F', F''."""
    a, b = stencil
    if (a, b) == (0, 0):
        return F0
    if (a, b) == (1, 0):
        return 2.0 * delta1 * F1
    if (a, b) == (0, 1):
        return -2.0 * delta1 * F1
    if (a, b) == (1, 1):
        return -(4.0 * delta1**2 * F2 + 2.0 * F1)
    return 4.0 * delta1**2 * F2 + 2.0 * F1


def free_kernel(kind: str, t, x, y, d: int, stencil=(0, 0)):
    """Free-space kernels of -Laplacian in R^d; stencils act on the first coordinate."""
    _check_stencil(stencil)
    t = np.asarray(t)
    xv, yv = _as_vec(x), _as_vec(y)
    if len(xv) != d or len(yv) != d:
        raise UnsupportedDimension(f"points must have {d} coordinates")
    rho = float(np.sum((xv - yv) ** 2))
    delta1 = float(xv[0] - yv[0])
    if kind == "heat":
        F0 = (4.0 * math.pi * t) ** (-d / 2) * np.exp(-rho / (4.0 * t))
        F1 = -F0 / (4.0 * t)
        F2 = F0 / (16.0 * t * t)
        return _radial_stencil(F0, F1, F2, delta1, stencil)
    if kind == "cylinder":
        K = gamma_fn((d + 1) / 2) * t / math.pi ** ((d + 1) / 2)
        p = (d + 1) / 2
    elif kind == "modified_cylinder":
        if d < 2:
            raise UnsupportedDomain("the free-space modified cylinder kernel is ill-defined for d = 1")
        K = gamma_fn((d - 1) / 2) / (2.0 * math.pi ** ((d + 1) / 2))
        p = (d - 1) / 2
    else:
        raise UnsupportedDomain(f"unknown kernel kind {kind!r}")
    s = t * t + rho
    F0 = K * s ** (-p)
    F1 = -p * K * s ** (-p - 1)
    F2 = p * (p + 1) * K * s ** (-p - 2)
    return _radial_stencil(F0, F1, F2, delta1, stencil)


def half_space_cylinder(t, x, y, d: int):
    """Dirichlet half space {x^1 > 0} by reflection of the free kernel."""
    yv = _as_vec(y).copy()
    ystar = yv.copy()
    ystar[0] = -ystar[0]
    return free_kernel("cylinder", t, x, yv, d) - free_kernel("cylinder", t, x, ystar, d)


def greens_route_cylinder(d: int, t, x, y):
    """T = d/dt' G(t, x; t', y) at t' = 0 for the Dirichlet half space in
    (t, x) built from the free Green function of -Laplacian in R^(d+1).

    G(t, x; t', y) = G0(t - t', r) - G0(t + t', r); the t'-derivative of
    G0(s, r) is taken on its closed form:

        d = 1:   G0 = -(1/4 pi) ln(s^2 + r^2)
        d >= 2:  G0 = Gamma((d+1)/2) / ((d-1) 2 pi^((d+1)/2) (s^2 + r^2)^((d-1)/2))
    """
    if d < 1:
        raise UnsupportedDimension("greens_route_cylinder needs d >= 1")
    t = np.asarray(t, dtype=float)
    xv, yv = _as_vec(x), _as_vec(y)
    r2 = float(np.sum((xv - yv) ** 2))

    def dG0_ds(s):
        # derivative of G0 with respect to its time separation s
        R2 = s * s + r2
        if d == 1:
            return -(1.0 / (4.0 * math.pi)) * 2.0 * s / R2
        pref = gamma_fn((d + 1) / 2) / ((d - 1) * 2.0 * math.pi ** ((d + 1) / 2))
        return pref * (-(d - 1) / 2.0) * 2.0 * s * R2 ** (-(d + 1) / 2)

    tp = 0.0
    # d/dt' G0(t - t') = -G0'(t - t');  d/dt' [-G0(t + t')] = -G0'(t + t')
    return -dG0_ds(t - tp) - dG0_ds(t + tp)


# heat kernels on segments ---------------------------------------------------

def segment_heat(t, x, y, a, bc: str, images: int = 60):
    """Segment heat kernel by the method of images (zero mode removed for
    Neumann and periodic)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise NonPositiveTime("heat kernel needs t > 0")
    G = lambda z: np.exp(-z * z / (4.0 * t)) / np.sqrt(4.0 * math.pi * t)
    total = 0.0
    ms = range(-images, images + 1)
    if bc == "periodic":
        for m in ms:
            total = total + G(x - y + m * a)
        return total - 1.0 / a
    if bc in ("dirichlet", "neumann"):
        s = -1.0 if bc == "dirichlet" else 1.0
        for m in ms:
            total = total + G(x - y + 2 * m * a) + s * G(x + y + 2 * m * a)
        return total - (1.0 / a if bc == "neumann" else 0.0)
    # Dirichlet at 0, Neumann at a: period 4a with alternating signs
    for m in ms:
        sg = (-1.0) ** m
        total = total + sg * (G(x - y + 2 * m * a) - G(x + y + 2 * m * a))
    return total


# kernel objects ---------------------------------------------------------------

@dataclass(frozen=True)
class KernelFunction:
    """An evaluable kernel K(t; x, y) with a derivative stencil on (x, y).

    ``backing`` is "spectral_sum" (needs ``model``) or "closed_form"
    (needs ``domain``).
    """

    kind: str
    backing: str
    domain: DomainDescriptor | None = None
    model: SpectralModel | None = None
    tail_tol: float = 1e-12
    stencil: tuple = (0, 0)
    formula_id: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KindMismatch(f"unknown kernel kind {self.kind!r}")
        _check_stencil(self.stencil)

    def with_stencil(self, stencil) -> "KernelFunction":
        return KernelFunction(self.kind, self.backing, self.domain, self.model, self.tail_tol, tuple(stencil), self.formula_id)

    def __call__(self, t, x, y):
        if self.backing == "spectral_sum":
            return spectral_sum(self.model, self.kind, t, x, y, self.stencil, self.tail_tol)
        dom = self.domain
        if dom.kind == "segment":
            if self.kind == "heat":
                if self.stencil != (0, 0):
                    raise UnsupportedStencil("closed-form segment heat kernel has no stencils")
                return segment_heat(t, x, y, dom.a, dom.bc)
            return segment_kernel(self.kind, t, x, y, dom.a, dom.bc, self.stencil)
        if dom.kind == "free_space":
            return free_kernel(self.kind, t, x, y, dom.d, self.stencil)
        if dom.kind == "half_space" and self.kind == "cylinder" and self.stencil == (0, 0):
            return half_space_cylinder(t, x, y, dom.d)
        raise UnsupportedDomain(f"no closed-form {self.kind} kernel for {dom.kind}")

    def diagonal(self, t, x):
        return self(t, x, x)


def _n_terms(model: SpectralModel, kind: str, t_min: float, p: int, tol: float) -> int:
    B2 = model.sup_bound**2
    n = 16
    while True:
        w = model.frequencies(n)
        wN = float(w[-1])
        lead = B2 * max(1.0, wN) ** p * (1.0 / max(float(w[0]), 1e-300) if kind == "modified_cylinder" else 1.0)
        rate = wN * wN * t_min if kind == "heat" else wN * t_min
        if rate >= math.log(max(lead * n, 1.0) / tol) + TAIL_SAFETY:
            return n
        if n >= MAX_TERMS:
            raise TailBoundUnreachable(
                f"t = {t_min} too small to reach tail_tol = {tol} within {MAX_TERMS} terms"
            )
        n = min(2 * n, MAX_TERMS)


def spectral_sum(model: SpectralModel, kind: str, t, x, y, stencil=(0, 0), tail_tol: float = 1e-12):
    """sum_k w_k(t) d^alpha F_k(x) conj(d^beta F_k(y)), truncated by the tail rule
    omega_N t >= ln(term bound / tail_tol) + 5."""
    _check_stencil(stencil)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise NonPositiveTime("spectral sums need t > 0")
    n = _n_terms(model, kind, float(np.min(t_arr)), stencil[0] + stencil[1], tail_tol)
    w = model.frequencies(n)
    fx = model.modes(x, n, stencil[0])
    fy = np.conj(model.modes(y, n, stencil[1]))
    amp = fx * fy
    tt = t_arr[..., None]
    if kind == "cylinder":
        weights = np.exp(-w * tt)
    elif kind == "modified_cylinder":
        weights = np.exp(-w * tt) / w
    else:
        weights = np.exp(-w * w * tt)
    out = np.sum(weights * amp, axis=-1)
    if np.all(np.abs(np.imag(out)) <= 1e-14 * (1 + np.abs(out))):
        out = np.real(out)
    return out if t_arr.ndim else out[()]


def spectral_cylinder(model: SpectralModel, stencil=(0, 0), tail_tol: float = 1e-12) -> KernelFunction:
    if model.zero_mode_removed is False and model.domain.kind == "segment" and model.domain.bc in ("neumann", "periodic"):
        raise UnsupportedDomain("model must be strictly positive")
    return KernelFunction("cylinder", "spectral_sum", model.domain, model, tail_tol, tuple(stencil), "spectral")


def spectral_kernel(model: SpectralModel, kind: str, stencil=(0, 0), tail_tol: float = 1e-12) -> KernelFunction:
    return KernelFunction(kind, "spectral_sum", model.domain, model, tail_tol, tuple(stencil), "spectral")


def closed_form_cylinder(domain: DomainDescriptor, stencil=(0, 0)) -> KernelFunction:
    if domain.kind == "segment":
        fid = f"segment_{domain.bc}"
    elif domain.kind == "free_space":
        fid = f"free_space_d{domain.d}"
    elif domain.kind == "half_space":
        fid = f"half_space_d{domain.d}"
    else:
        raise UnsupportedDomain(f"no closed-form cylinder kernel for {domain.kind}")
    return KernelFunction("cylinder", "closed_form", domain, None, 0.0, tuple(stencil), fid)


def closed_form_heat(domain: DomainDescriptor) -> KernelFunction:
    if domain.kind not in ("segment", "free_space"):
        raise UnsupportedDomain(f"no closed-form heat kernel for {domain.kind}")
    return KernelFunction("heat", "closed_form", domain, None, 0.0, (0, 0), f"heat_{domain.kind}")


def modified_from_cylinder(T: KernelFunction) -> KernelFunction:
    """The modified kernel T~ = int_t^inf T, for closed-form backings."""
    if T.kind != "cylinder":
        raise KindMismatch("modified_from_cylinder expects a cylinder kernel")
    if T.backing != "closed_form":
        raise UnsupportedForSpectralBacking("T~ is only built from closed forms")
    dom = T.domain
    if dom.kind == "free_space" and dom.d < 2:
        raise UnsupportedDomain("the free-space modified cylinder kernel is ill-defined for d = 1")
    if dom.kind == "half_space":
        raise UnsupportedDomain("half space supports the cylinder kernel only")
    return KernelFunction("modified_cylinder", "closed_form", dom, None, 0.0, T.stencil, T.formula_id + "_modified")


@dataclass(frozen=True)
class ProductHeatKernel:
    """Pointwise product of two heat kernels in split coordinates (x1, x2)."""

    left: object
    right: object
    kind: str = "heat"

    def __call__(self, t, x, y):
        return self.left(t, x[0], y[0]) * self.right(t, x[1], y[1])


def heat_from_product(k1, k2):
    if getattr(k1, "kind", None) != "heat" or getattr(k2, "kind", None) != "heat":
        raise KindMismatch("heat_from_product needs two heat kernels")
    if isinstance(k1, TraceFunction) or isinstance(k2, TraceFunction):
        if not (isinstance(k1, TraceFunction) and isinstance(k2, TraceFunction)):
            raise KindMismatch("cannot mix a trace with a kernel")
        return TraceFunction("heat", lambda t: k1(t) * k2(t), None, "product")
    return ProductHeatKernel(k1, k2)


# expansions -------------------------------------------------------------------

@dataclass(frozen=True)
class ExactExpansion:
    """Exact form: series = prefactor * sum_k U_k (scale t)^k with rational U_k."""

    u_series: LogLaurentSeries
    scale: PiRational
    prefactor: PiRational

    def coefficient(self, k: int) -> PiRational:
        return self.prefactor * PiRational(self.u_series.coefficient(k)) * self.scale**k


@dataclass(frozen=True)
class KernelExpansion:
    series: LogLaurentSeries
    point: object
    stencil: tuple = (0, 0)
    kind: str = "cylinder"
    provenance: str = "exact_closed_form"
    exact: ExactExpansion | None = None


def _trig_field(tr: Trig, names: Sequence[str]):
    vals = [getattr(tr, n) for n in names]
    if any(v is None for v in vals):
        raise SeriesDomainViolation("trigonometric data at this point is not rational; use float mode")
    return vals


class _USeries:
    """Elementary u-series with a shared working window."""

    def __init__(self, window: int, exact: bool):
        self.W = window
        one = Fraction(1) if exact else 1.0
        self.one = one
        u = LogLaurentSeries.variable(one, window)
        self.u = u
        self.cosh_m1 = lift_elementary("cosh", u) - one
        self.sinh = lift_elementary("sinh", u)
        half = u * (one / 2)
        self.sinh_half = lift_elementary("sinh", half)
        self.cosh_half = lift_elementary("cosh", half)
        self.exp_u = lift_elementary("exp", u)

    def D(self, s2):
        return (self.cosh_m1 + 2 * s2).normalized()


@lru_cache(maxsize=32)
def _u_series(window: int, exact: bool) -> _USeries:
    # series are immutable, so one instance per (window, mode) is shared
    return _USeries(window, exact)


def _geom_u(kind: str, m: int, tr: Trig, S: _USeries) -> LogLaurentSeries:
    """u-series of the geom block without its constant prefactor
    (c/2pi for the cylinder block, 1/2pi for the modified one)."""
    if kind == "cylinder":
        if m == 0:
            (s2,) = _trig_field(tr, ["s2"])
            return S.sinh * invert(S.D(s2)) - S.one
        if m == 1:
            s2, st = _trig_field(tr, ["s2", "st"])
            iD = invert(S.D(s2))
            return -(S.sinh * iD * iD) * st
        s2, ct, st2 = _trig_field(tr, ["s2", "ct", "st2"])
        iD = invert(S.D(s2))
        iD2 = iD * iD
        return -(S.sinh * (iD2 * ct - iD2 * iD * (2 * st2)))
    if m == 0:
        (s2,) = _trig_field(tr, ["s2"])
        # f = -(1/2pi)(ln 2 - u + ln D)
        lnD = log_series(S.D(s2))
        return -(lnD - S.u + math.log(2.0))
    if m == 1:
        s2, st = _trig_field(tr, ["s2", "st"])
        return -(invert(S.D(s2)) * st)
    s2, ct, st2 = _trig_field(tr, ["s2", "ct", "st2"])
    iD = invert(S.D(s2))
    return -(iD * ct - iD * iD * st2)


def _dn_u(kind: str, m: int, tr: Trig, S: _USeries) -> LogLaurentSeries:
    """u-series of the half-angle block without its prefactor (c/pi resp. 1/pi)."""
    if kind == "cylinder":
        if m == 0:
            sp2, cp = _trig_field(tr, ["sp2", "cp"])
            return S.sinh_half * invert(S.D(sp2)) * cp
        if m == 1:
            sp2, cp, sp, st = _trig_field(tr, ["sp2", "cp", "sp", "st"])
            iD = invert(S.D(sp2))
            return S.sinh_half * (iD * (-sp / 2) - iD * iD * (cp * st))
        sp2, cp, ct, st2 = _trig_field(tr, ["sp2", "cp", "ct", "st2"])
        iD = invert(S.D(sp2))
        iD2 = iD * iD
        return S.sinh_half * (
            iD * (-cp / 4) + iD2 * (2 * sp2 * cp) - iD2 * (cp * ct) + iD2 * iD * (2 * cp * st2)
        )
    if m == 0:
        (cp,) = _trig_field(tr, ["cp"])
        # k = (1/2pi) [ln(C + cp) - ln(C - cp)]
        return (log_series(S.cosh_half + cp) - log_series(S.cosh_half - cp)) * 0.5
    if m == 1:
        sp2, sp = _trig_field(tr, ["sp2", "sp"])
        return -(S.cosh_half * invert(S.D(sp2)) * sp)
    sp2, cp = _trig_field(tr, ["sp2", "cp"])
    D = S.D(sp2)
    iD = invert(D)
    return -(S.cosh_half * (iD * (cp / 2) - iD * iD * (2 * cp * sp2)))


def _segment_expansion(kind: str, x, a, bc: str, stencil, order: int, exact: bool) -> KernelExpansion:
    family, signs = SEGMENT_FAMILY[bc]
    m = stencil[0] + stencil[1]
    W = order + 8
    S = _u_series(W, exact)
    builder = _geom_u if family == "geom" else _dn_u
    if exact:
        a = Fraction(a)
        x = Fraction(x)
    nus = image_nus(x, x, a, bc)
    total = None
    for nu, s, sig in zip(nus, signs, (-1, 1)):
        if s == 0:
            continue
        tr = Trig.of(nu, exact=exact)
        part = builder(kind, m, tr, S) * (s * sig ** stencil[1])
        total = part if total is None else total + part
    c_float, gam = segment_scale(a, bc)
    # prefactors: geom cylinder c/2pi, geom modified 1/2pi, dn cylinder c/pi, dn modified 1/pi
    if family == "geom":
        pre = PiRational(Fraction(gam) / 2, 0) if kind == "cylinder" else PiRational(Fraction(1, 2), -1)
    else:
        pre = PiRational(Fraction(gam), 0) if kind == "cylinder" else PiRational(Fraction(1), -1)
    total = total.truncate(order)
    if exact and _boundary_zero_exact(x, a, bc, stencil):
        total = LogLaurentSeries.zero(total.min_order, total.truncation_order)
    if exact:
        if total.has_log or not total.exact:
            raise SeriesDomainViolation("exact expansion requested for a log-bearing or irrational series")
        scale = PiRational(Fraction(gam), 1)
        pre_full = pre * scale**m
        ex = ExactExpansion(total, scale, pre_full)
        coeffs = [complex(float(ex.coefficient(k))) for k in total.orders]
        series = LogLaurentSeries(total.min_order, tuple(coeffs), (0.0,) * len(coeffs), total.truncation_order)
        return KernelExpansion(series, x, tuple(stencil), kind, "exact_closed_form", ex)
    pre_f = float(pre) * c_float**m
    series = (total.to_float() * pre_f).rescale(c_float)
    if _vanishes_at_boundary(float(x), float(x), float(a), bc, stencil):
        series = LogLaurentSeries.zero(series.min_order, series.truncation_order)
    return KernelExpansion(series, x, tuple(stencil), kind, "exact_closed_form", None)


def _boundary_zero_exact(x, a, bc, stencil) -> bool:
    ends = dirichlet_endpoints(a, bc)
    return (stencil[0] == 0 or stencil[1] == 0) and any(x == e for e in ends)


def _free_expansion(kind: str, d: int, stencil, order: int) -> KernelExpansion:
    # diagonal values are single powers of t
    if kind == "cylinder":
        K = gamma_fn((d + 1) / 2) / math.pi ** ((d + 1) / 2)
        p = (d + 1) / 2
        base_power = 1
    elif kind == "modified_cylinder":
        if d < 2:
            raise UnsupportedDomain("the free-space modified cylinder kernel is ill-defined for d = 1")
        K = gamma_fn((d - 1) / 2) / (2.0 * math.pi ** ((d + 1) / 2))
        p = (d - 1) / 2
        base_power = 0
    else:
        raise UnsupportedDomain("heat expansions are not provided")
    # F(rho) = K t^base (t^2 + rho)^-p at rho = 0 and its rho-derivative
    if stencil == (0, 0):
        coef, power = K, base_power - 2 * p
    elif stencil in ((1, 1), (2, 0), (0, 2)):
        F1 = -p * K
        coef = -2.0 * F1 if stencil == (1, 1) else 2.0 * F1
        power = base_power - 2 * p - 2
    elif stencil in ((1, 0), (0, 1)):
        coef, power = 0.0, base_power - 2 * p
    else:
        raise UnsupportedStencil(f"stencil {stencil}")
    power = int(round(power))
    series = LogLaurentSeries.monomial(power, coef, truncation_order=max(order, power + 1))
    return KernelExpansion(series, None, tuple(stencil), kind, "exact_closed_form", None)


def expand_at_zero(k: KernelFunction, x, order: int = 12, exact: bool = False) -> KernelExpansion:
    """Small-t expansion of k(t; x, x) with truncation order ``order``.

    Exact mode needs rational a and x with rational image cosines; the
    modified kernel without derivatives carries ln t and is float-only.
    """
    if order > MAX_EXPANSION_ORDER:
        raise SeriesDomainViolation(f"order {order} exceeds {MAX_EXPANSION_ORDER}")
    _check_stencil(k.stencil)
    if k.backing != "closed_form":
        raise SeriesDomainViolation("expansions need a closed-form kernel")
    if k.kind == "heat":
        raise UnsupportedDomain("heat-kernel expansions are not provided")
    dom = k.domain
    if dom.kind == "segment":
        return _segment_expansion(k.kind, x, dom.a, dom.bc, k.stencil, order, exact)
    if dom.kind == "free_space":
        return _free_expansion(k.kind, dom.d, k.stencil, order)
    raise UnsupportedDomain(f"no expansion for {dom.kind}")


# traces -------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceFunction:
    kind: str
    evaluate: Callable
    domain: DomainDescriptor | None = None
    formula_id: str = ""
    model: SpectralModel | None = None

    def __call__(self, t):
        return self.evaluate(t)

    def expand(self, order: int = 12, exact: bool = False) -> KernelExpansion:
        dom = self.domain
        if self.kind != "cylinder" or dom is None or dom.kind != "segment":
            raise UnsupportedDomain("trace expansions exist for segment cylinder traces")
        W = order + 6
        one = Fraction(1) if exact else 1.0
        u = LogLaurentSeries.variable(one, W)
        em1 = (lift_elementary("exp", u) - one).normalized()
        bc = dom.bc
        if bc in ("dirichlet", "neumann"):
            U = invert(em1)
        elif bc == "periodic":
            U = invert(em1) * 2
        else:
            U = lift_elementary("exp", u * (one / 2)) * invert(em1)
        U = U.truncate(order)
        a = Fraction(dom.a) if exact else dom.a
        c, gam = segment_scale(a, bc)
        if exact:
            ex = ExactExpansion(U, PiRational(Fraction(gam), 1), PiRational(1))
            coeffs = [complex(float(ex.coefficient(kk))) for kk in U.orders]
            series = LogLaurentSeries(U.min_order, tuple(coeffs), (0.0,) * len(coeffs), U.truncation_order)
            return KernelExpansion(series, None, (0, 0), "cylinder_trace", "exact_closed_form", ex)
        return KernelExpansion(U.to_float().rescale(c), None, (0, 0), "cylinder_trace", "exact_closed_form", None)


def _segment_trace(kind: str, dom: DomainDescriptor) -> Callable:
    a, bc = dom.a, dom.bc
    c, _ = segment_scale(a, bc)

    def cyl(t):
        u = c * np.asarray(t)
        if bc in ("dirichlet", "neumann"):
            return 1.0 / np.expm1(u)
        if bc == "periodic":
            return 2.0 / np.expm1(u)
        return np.exp(u / 2) / np.expm1(u)

    if kind == "cylinder":
        return cyl

    def heat(t):
        t = np.asarray(t, dtype=float)
        model = as_model(dom)
        return spectral_trace(model, "heat", t)

    return heat


def spectral_trace(model: SpectralModel, kind: str, t, tail_tol: float = 1e-13):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise NonPositiveTime("traces need t > 0")
    n = _n_terms(model, kind, float(np.min(t_arr)), 0, tail_tol)
    w = model.frequencies(n)
    tt = t_arr[..., None]
    if kind == "heat":
        vals = np.exp(-w * w * tt)
    elif kind == "cylinder":
        vals = np.exp(-w * tt)
    else:
        vals = np.exp(-w * tt) / w
    out = np.sum(vals, axis=-1)
    return out if t_arr.ndim else out[()]


def trace_function(obj, kind: str = "cylinder") -> TraceFunction:
    """Trace of the heat or cylinder kernel for a segment domain (closed form
    for the cylinder kind) or any discrete model (truncated sum)."""
    if isinstance(obj, DomainDescriptor):
        if obj.kind == "segment":
            return TraceFunction(kind, _segment_trace(kind, obj), obj, f"trace_{obj.bc}", as_model(obj))
        if obj.kind == "product":
            model = as_model(obj)
            return TraceFunction(kind, lambda t: spectral_trace(model, kind, t), obj, "spectral", model)
        raise UnsupportedDomain(f"no trace for {obj.kind}")
    if isinstance(obj, SpectralModel):
        return TraceFunction(kind, lambda t: spectral_trace(obj, kind, t), obj.domain, "spectral", obj)
    raise UnsupportedDomain("trace_function needs a domain or a spectral model")
