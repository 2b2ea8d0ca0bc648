"""Renormalized observables: stress-energy VEV, energies, boundary forces,
the deformation check and slab reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.integrate import quad

from .continuation import (
    RegularPart,
    analytic_taylor,
    kernel_mellin_spec,
    mellin_laurent_at_pole,
    neville,
    renormalized_kernel_set,
    trace_mellin_spec,
    trace_residue,
)
from .errors import (
    BoundaryPoint,
    MissingKernelData,
    PoleEncountered,
    UnsupportedBoundaryCondition,
    UnsupportedDomain,
)
from .kernels import closed_form_cylinder, expand_at_zero, modified_from_cylinder, trace_function
from .laurent import LogLaurentSeries, PiRational
from .spectrum import DomainDescriptor, segment

INTERIOR_EPS = 1e-9


def xi_critical(d: int) -> float:
    return (d - 1) / (4.0 * d)


@dataclass(frozen=True)
class ObservableRequest:
    domain: DomainDescriptor
    xi: float = 0.0
    points: tuple = ()
    kappa: float = 1.0
    slab_free_dims: int = 0
    exact: bool = False

    def __post_init__(self):
        if not math.isfinite(self.xi):
            raise ValueError("xi must be finite")
        if not (self.kappa > 0):
            raise ValueError("kappa must be positive")
        object.__setattr__(self, "points", tuple(self.points))
        for x in self.points:
            check_interior(self.base_domain, x)

    @property
    def base_domain(self) -> DomainDescriptor:
        return self.domain.base if self.domain.kind == "slab" else self.domain

    @property
    def d2(self) -> int:
        return self.domain.free_dims if self.domain.kind == "slab" else self.slab_free_dims

    @property
    def dimension(self) -> int:
        return self.base_domain.dimension + self.d2


def check_interior(domain: DomainDescriptor, x) -> None:
    if domain.kind == "segment":
        xf = float(x)
        if not (INTERIOR_EPS < xf < domain.a - INTERIOR_EPS):
            raise BoundaryPoint(f"x = {x} is not strictly inside (0, {domain.a})")


@dataclass(frozen=True)
class StressEnergyVEV:
    full: np.ndarray
    conformal_part: np.ndarray
    nonconformal_part: np.ndarray
    xi_critical: float
    xi: float = 0.0
    point: object = None
    method: str = "residue"
    exact_entries: dict | None = None  # exact mode: name -> (value at xi = 0, xi slope) as PiRationals
    pole_flags: dict = field(default_factory=dict)


# stress-energy assembly --------------------------------------------------------------

@dataclass(frozen=True)
class _Blocks:
    """Renormalized kernel data in d = 1 + d2 dimensions (base axis first).

    d_mh: D_{-1/2}(x,x); dd_base: d_x1 d_y1 D_{1/2}; dxx_base: d_x1 d_x1 D_{1/2};
    dd_trans: d_xj d_yj D_{1/2} for one transverse axis (d_xj d_xj is its negative).
    """

    d_mh: complex
    dd_base: complex
    dxx_base: complex
    dd_trans: complex = 0.0
    d2: int = 0


def _tensor(b: _Blocks, xi: float) -> np.ndarray:
    d = 1 + b.d2
    trace_dd = b.dd_base + b.d2 * b.dd_trans
    T = np.zeros((d + 1, d + 1))
    T[0, 0] = ((0.25 + xi) * b.d_mh + (0.25 - xi) * trace_dd).real
    iso = (0.25 - xi) * (b.d_mh - trace_dd)
    T[1, 1] = (iso + (0.5 - xi) * b.dd_base - xi * b.dxx_base).real
    for j in range(2, d + 1):
        T[j, j] = (iso + 0.5 * b.dd_trans).real
    return T


def conformal_split(vev_fn: Callable[[float], np.ndarray] | np.ndarray, xi: float, d: int, vev_at_critical=None):
    """(conformal, nonconformal) parts of an affine-in-xi VEV.

    ``vev_fn`` evaluates the VEV at a given xi; a bare matrix (the value at
    ``xi``) needs ``vev_at_critical`` (the value at xi_d) as well.
    """
    xd = xi_critical(d)
    if callable(vev_fn):
        conf = np.asarray(vev_fn(xd))
        if xi != xd:
            nonconf = (np.asarray(vev_fn(xi)) - conf) / (xi - xd)
        else:
            nonconf = np.asarray(vev_fn(xd + 1.0)) - conf
        return conf, nonconf
    if vev_at_critical is None:
        raise MissingKernelData("a second sample at the critical coupling is needed")
    conf = np.asarray(vev_at_critical)
    if xi == xd:
        raise MissingKernelData("xi equals the critical coupling; pass a callable")
    return conf, (np.asarray(vev_fn) - conf) / (xi - xd)


def _vev_from_blocks(b: _Blocks, xi: float, point, method: str, flags=None) -> StressEnergyVEV:
    d = 1 + b.d2
    xd = xi_critical(d)
    conf = _tensor(b, xd)
    # the tensor is affine in xi: the slope is T(1) - T(0)
    nonconf = _tensor(b, 1.0) - _tensor(b, 0.0)
    full = conf + (xi - xd) * nonconf
    return StressEnergyVEV(full, conf, nonconf, xd, xi, point, method, None, dict(flags or {}))


def _segment_blocks(domain: DomainDescriptor, x, exact: bool = False):
    ks = renormalized_kernel_set(domain, x, exact=exact)
    b = _Blocks(ks.d_minus_half, ks.dd_plus_half[(1, 1)], ks.dd_plus_half[(2, 0)])
    return b, ks


def _exact_entries(ks):
    """Exact T00 and T11 as (constant, xi-slope) pairs of PiRationals (d = 1)."""
    D = ks.exact_values["d_minus_half"]
    DD = ks.exact_values[(1, 1)]
    DXX = ks.exact_values[(2, 0)]
    q = PiRational(Fraction(1, 4), 0)
    t00 = ((D + DD) * q, D - DD)
    t11 = ((D + DD) * q, -(D + DXX))
    return t00, t11


def stress_energy(req: ObservableRequest, x) -> StressEnergyVEV:
    """Renormalized <T_mu nu>(x) for a segment or a slab over a segment."""
    base = req.base_domain
    check_interior(base, x)
    if req.d2 > 0:
        return slab_reduce(base, req.d2, req.kappa)(x, req.xi)
    if base.kind == "free_space":
        d = base.dimension
        T = np.zeros((d + 1, d + 1))
        return StressEnergyVEV(T, T.copy(), T.copy(), xi_critical(d), req.xi, x, "residue")
    if base.kind != "segment":
        raise UnsupportedDomain(f"stress_energy does not handle {base.kind}")
    b, ks = _segment_blocks(base, x, exact=req.exact)
    vev = _vev_from_blocks(b, req.xi, x, "residue")
    if req.exact:
        t00, t11 = _exact_entries(ks)
        vev = StressEnergyVEV(vev.full, vev.conformal_part, vev.nonconformal_part, vev.xi_critical,
                              vev.xi, x, "residue_exact", {"T00": t00, "T11": t11})
    return vev


def _t11_at(domain: DomainDescriptor, x, xi: float) -> float:
    b, _ = _segment_blocks(domain, x)
    return float(_tensor(b, xi)[1, 1])


# energies -----------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyReport:
    bulk: float
    boundary: float
    total: float
    method_tags: dict
    exact_bulk: PiRational | None = None
    pole_order: int = 0
    ln_kappa_coefficient: float = 0.0
    gamma_ratio_pole: bool = False


def bulk_energy(req: ObservableRequest):
    """E^ren = 1/2 Tr A^(1/2) = -1/2 Res(t^-2 T(t); 0) from the closed-form trace."""
    dom = req.base_domain
    if req.d2 > 0:
        return reduced_energy(req).bulk
    if dom.kind != "segment":
        raise UnsupportedDomain("bulk_energy is implemented for segments")
    e = trace_function(dom).expand(order=6, exact=req.exact)
    v = trace_residue(e, 1, exact=req.exact)
    if req.exact:
        return v * PiRational(Fraction(1, 2), 0)
    return 0.5 * v.real


def boundary_energy(req: ObservableRequest) -> float:
    """Surface term of the regularized energy; it vanishes for all four
    segment conditions (kernel or its normal derivative is zero at the
    endpoints, and periodic segments have no boundary)."""
    dom = req.base_domain
    if dom.kind != "segment" or dom.bc not in ("dirichlet", "neumann", "dirichlet_neumann", "periodic"):
        raise UnsupportedBoundaryCondition(f"no boundary-energy rule for {dom}")
    return 0.0


def energy_report(req: ObservableRequest) -> EnergyReport:
    if req.d2 > 0:
        return reduced_energy(req)
    bulk = bulk_energy(req)
    exact_bulk = None
    if req.exact:
        exact_bulk = bulk
        bulk = float(bulk)
    bnd = boundary_energy(req)
    return EnergyReport(bulk, bnd, bulk + bnd, {"bulk": "residue", "boundary": "vanishing", "total": "residue"}, exact_bulk)


def density_integral_energy(req: ObservableRequest, margins=(1e-2, 1e-3, 1e-4)) -> dict:
    """Alternative total energy: integral of the renormalized T00 at the
    requested xi. Reports divergence instead of a number when the
    nonconformal part is not integrable at the walls."""
    dom = req.base_domain
    a = dom.a
    nc = [abs(stress_energy(ObservableRequest(dom, req.xi), m * a).nonconformal_part[0, 0]) for m in margins]
    d = 1
    if req.xi != xi_critical(d) and nc[-1] > 0 and nc[-1] > 10.0 * nc[0]:
        growth = math.log(nc[-1] / nc[-2]) / math.log(margins[-2] / margins[-1])
        if growth >= 1.0:
            return {"value": None, "diverges": True, "wall_exponent": growth}
    val, err = quad(lambda x: stress_energy(ObservableRequest(dom, req.xi), x).full[0, 0],
                    0.0, a, epsabs=1e-12, epsrel=1e-12, limit=200)
    return {"value": val, "diverges": False, "error": err}


def conformal_density_integral(domain: DomainDescriptor, tol: float = 1e-12) -> float:
    """int_0^a conformal T00(x) dx by adaptive quadrature."""
    val, _ = quad(lambda x: stress_energy(ObservableRequest(domain), x).conformal_part[0, 0],
                  0.0, domain.a, epsabs=tol, epsrel=tol, limit=200)
    return val


# forces ----------------------------------------------------------------------------------

@dataclass(frozen=True)
class ForceEntry:
    point: float
    normal: int
    at_boundary: float
    interior_limit: float


@dataclass(frozen=True)
class ForceReport:
    entries: tuple
    agreement_gap: float
    method_tags: dict = field(default_factory=lambda: {"at_boundary": "residue", "interior_limit": "richardson"})

    def value(self, point: float, prescription: str = "at_boundary") -> float:
        for e in self.entries:
            if e.point == point:
                return getattr(e, prescription)
        raise KeyError(point)


def boundary_force(req: ObservableRequest, prescription: str | None = None, steps=(0.2, 0.1, 0.05)) -> ForceReport:
    """F(x) = T11(x) n(x) with n(0) = -1, n(a) = +1, under both
    prescriptions: evaluation at the endpoint, and Richardson extrapolation
    of interior values toward it."""
    dom = req.base_domain
    if dom.kind != "segment":
        raise UnsupportedDomain("forces are implemented for segments")
    a = dom.a
    entries = []
    gap = 0.0
    for end, normal in ((0.0, -1), (a, 1)):
        at_b = normal * _t11_at(dom, end, req.xi)
        hs = [s * a for s in steps]
        vals = [_t11_at(dom, end - normal * h, req.xi) for h in hs]
        lim, _ = neville(hs, vals)
        inner = normal * lim.real
        entries.append(ForceEntry(end, normal, at_b, inner))
        gap = max(gap, abs(at_b - inner))
    if prescription not in (None, "at_boundary", "interior_limit"):
        raise ValueError(f"unknown prescription {prescription!r}")
    return ForceReport(tuple(entries), gap)


def deformation_consistency(req: ObservableRequest, delta: float) -> float:
    """|E(a + delta) - E(a) + delta F(a)| for the endpoint shift a -> a + delta."""
    dom = req.base_domain
    if dom.kind != "segment":
        raise UnsupportedDomain("the deformation check is implemented for segments")
    if delta == 0:
        return 0.0
    e0 = bulk_energy(ObservableRequest(dom))
    e1 = bulk_energy(ObservableRequest(segment(dom.a + delta, dom.bc)))
    f_a = boundary_force(ObservableRequest(dom, req.xi)).value(dom.a)
    return abs(e1 - e0 + delta * f_a)


def deformation_slope(req: ObservableRequest, deltas: Sequence[float] = (1e-2, 1e-3, 1e-4)) -> float:
    """log-log slope of the deformation residual; 2 for a consistent force."""
    r = [deformation_consistency(req, d) for d in deltas]
    p, _ = np.polyfit(np.log(deltas), np.log(r), 1)
    return float(p)


# slab reduction ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SlabValue:
    """Regular part at u = 0 of kappa^u G(u) D_base at a shifted order.

    gamma_ratio_pole: G has a pole at u = 0. pole_order / ln_kappa_coefficient
    describe the product; the ln kappa coefficient equals the 1/u coefficient.
    """

    value: float
    pole_order: int
    ln_kappa_coefficient: float
    gamma_ratio_pole: bool
    method: str


def _ratio_has_pole(num_arg0: float) -> bool:
    return num_arg0 <= 0 and float(num_arg0).is_integer()


def _slab_value(
    gamma_ratio: Callable,
    num_arg0: float,
    sigma0: int,
    kappa: float,
    residue_c: float,
    spec_fn: Callable,
) -> SlabValue:
    """RP of kappa^u G(u) M(sigma0 + u)/Gamma(sigma0 + u), with M the Mellin
    transform whose 1/u coefficient is residue_c."""
    lk = math.log(kappa)
    A = analytic_taylor(
        lambda u: mpmath.exp(u * lk) * gamma_ratio(u) * mpmath.rgamma(sigma0 + u), 3
    )
    pole = _ratio_has_pole(num_arg0)
    Aseries = LogLaurentSeries.from_coeffs(A, 0, truncation_order=3)
    if abs(A[0]) <= 1e-15:
        rp = RegularPart(A[1] * residue_c, 0.0, 0, "residue")
    else:
        c_q, M0 = mellin_laurent_at_pole(spec_fn(), sigma0)
        rp = RegularPart(A[0] * M0 + A[1] * residue_c, A[0] * residue_c, 1 if abs(A[0] * residue_c) > 1e-14 else 0, "quadrature", abs(c_q - residue_c))
    return SlabValue(float(rp.value), rp.pole_order, float(rp.pole_coefficient), pole, rp.method)


class SlabReducer:
    """Maps (x, xi) to the slab VEV over a segment base with d2 free directions."""

    def __init__(self, base: DomainDescriptor, d2: int, kappa: float = 1.0, strict: bool = False):
        if base.kind != "segment":
            raise UnsupportedDomain("slab reduction is implemented over segment bases")
        if d2 < 0:
            raise ValueError("d2 must be nonnegative")
        self.base = base
        self.d2 = d2
        self.kappa = kappa
        self.strict = strict

    def components(self, x) -> dict:
        base, d2, kappa = self.base, self.d2, self.kappa
        R1 = (4.0 * mpmath.pi) ** (mpmath.mpf(d2) / 2)
        T = closed_form_cylinder(base)
        Tt = modified_from_cylinder(T)
        order = d2 + 6
        eT = expand_at_zero(T, x, order=order)
        xf = float(x)

        def coeff(e, k):
            return complex(e.series.coefficient(k)).real

        # D_{-1/2}: base order (u - d2 - 1)/2, sigma0 = -d2 - 1
        s0 = -d2 - 1
        g_mh = lambda u: mpmath.gamma((u - d2 - 1) / 2) / (R1 * mpmath.gamma((u - 1) / 2))
        d_mh = _slab_value(g_mh, (-d2 - 1) / 2, s0, kappa, coeff(eT, -s0),
                           lambda: kernel_mellin_spec(base, xf))
        # transverse block, same base order
        g_tr = lambda u: mpmath.gamma((u - d2 - 1) / 2) / (2 * R1 * mpmath.gamma((u + 1) / 2))
        dd_tr = _slab_value(g_tr, (-d2 - 1) / 2, s0, kappa, coeff(eT, -s0),
                            lambda: kernel_mellin_spec(base, xf))
        # base-direction derivatives of D_{1/2}: base order (u - d2 + 1)/2
        s1 = 1 - d2
        g_b = lambda u: mpmath.gamma((u - d2 + 1) / 2) / (R1 * mpmath.gamma((u + 1) / 2))
        out = {"d_minus_half": d_mh, "dd_trans": dd_tr}
        for name, st in (("dd_base", (1, 1)), ("dxx_base", (2, 0))):
            e = expand_at_zero(T.with_stencil(st), x, order=order)
            out[name] = _slab_value(g_b, (1 - d2) / 2, s1, kappa, coeff(e, -s1),
                                    lambda st=st: kernel_mellin_spec(base, xf, stencil=st))
        out["mixed"] = SlabValue(0.0, 0, 0.0, False, "structural")
        return out

    def __call__(self, x, xi: float = 0.0) -> StressEnergyVEV:
        check_interior(self.base, x)
        if self.d2 == 0:
            return stress_energy(ObservableRequest(self.base, xi), x)
        comp = self.components(x)
        flags = {k: (v.gamma_ratio_pole, v.pole_order, v.ln_kappa_coefficient) for k, v in comp.items()}
        poles = {k: v for k, v in comp.items() if v.pole_order > 0}
        if poles and self.strict:
            k, v = next(iter(poles.items()))
            raise PoleEncountered(f"pole in the {k} block", {"pole_order": v.pole_order, "regular_part": v.value,
                                                                  "ln_kappa_coefficient": v.ln_kappa_coefficient})
        b = _Blocks(comp["d_minus_half"].value, comp["dd_base"].value, comp["dxx_base"].value,
                    comp["dd_trans"].value, self.d2)
        method = "quadrature" if any(v.method == "quadrature" for v in comp.values()) else "residue"
        return _vev_from_blocks(b, xi, x, method, flags)


def slab_reduce(base: DomainDescriptor, d2: int, kappa: float = 1.0, strict: bool = False) -> SlabReducer:
    return SlabReducer(base, d2, kappa, strict)


def reduced_energy(req: ObservableRequest) -> EnergyReport:
    """Energy per unit transverse volume of a slab over a segment base:
    RP of kappa^u Gamma((u-d2-1)/2)/(2 R1 Gamma((u-1)/2)) Tr A1^((d2+1-u)/2)."""
    base, d2, kappa = req.base_domain, req.d2, req.kappa
    if d2 == 0:
        return energy_report(ObservableRequest(base, req.xi, kappa=kappa, exact=req.exact))
    if base.kind != "segment":
        raise UnsupportedDomain("reduced_energy is implemented over segment bases")
    R1 = (4.0 * mpmath.pi) ** (mpmath.mpf(d2) / 2)
    e = trace_function(base).expand(order=d2 + 6)
    s0 = -d2 - 1
    c = complex(e.series.coefficient(-s0)).real
    g = lambda u: mpmath.gamma((u - d2 - 1) / 2) / (2 * R1 * mpmath.gamma((u - 1) / 2))
    v = _slab_value(g, (-d2 - 1) / 2, s0, kappa, c, lambda: trace_mellin_spec(base))
    bnd = boundary_energy(ObservableRequest(base))
    return EnergyReport(v.value, bnd, v.value + bnd, {"bulk": v.method, "boundary": "vanishing", "total": v.method},
                        None, v.pole_order, v.ln_kappa_coefficient, v.gamma_ratio_pole)
