"""Built-in verification suite behind ``zetavac selftest``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import continuation as C
from . import kernels as K
from . import observables as O
from . import spectrum as S
from .laurent import PiRational

PI = math.pi
SEGMENT_ENERGIES = {
    "dirichlet": -PI / 24,
    "neumann": -PI / 24,
    "dirichlet_neumann": PI / 48,
    "periodic": -PI / 6,
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float


@dataclass(frozen=True)
class Check:
    name: str
    level: str  # fast | full
    fn: Callable[[dict], tuple]


def _diff(got, want, tol) -> tuple:
    err = float(np.max(np.abs(np.asarray(got) - np.asarray(want))))
    return err <= tol, f"max diff {err:.3e} (tol {tol:.0e})"


def check_stress_dirichlet(opts):
    r = O.stress_energy(O.ObservableRequest(S.segment(Fraction(1), "dirichlet"), exact=True), Fraction(1, 3))
    want = PiRational(Fraction(-1, 24), 1)
    c00, c11 = r.exact_entries["T00"][0], r.exact_entries["T11"][0]
    ok = c00 == want and c11 == want
    return ok, f"T00 = {c00}, T11 = {c11} (want {want})"


def check_nonconformal(opts):
    errs = []
    for x in (0.1, 0.25, 0.5):
        v = O.stress_energy(O.ObservableRequest(S.segment(1.0, "dirichlet"), xi=1.0), x)
        errs.append(v.nonconformal_part[0, 0] - (PI / 2) / math.sin(PI * x) ** 2)
    return _diff(errs, 0.0, 1e-10)


def check_energies(opts):
    got = [O.bulk_energy(O.ObservableRequest(S.segment(1.0, bc))) for bc in SEGMENT_ENERGIES]
    return _diff(got, list(SEGMENT_ENERGIES.values()), 1e-12)


def check_forces(opts):
    gaps, vals, want = [], [], []
    for bc, f0 in (("dirichlet", PI / 24), ("dirichlet_neumann", -PI / 48)):
        rep = O.boundary_force(O.ObservableRequest(S.segment(1.0, bc)))
        gaps.append(rep.agreement_gap)
        for e in rep.entries:
            vals += [e.at_boundary, e.interior_limit]
            want += [f0 * -e.normal] * 2
    ok, detail = _diff(vals, want, 1e-12)
    return ok and max(gaps) < 1e-12, f"{detail}; prescription gap {max(gaps):.2e}"


def check_periodic(opts):
    dom = S.segment(1.0, "periodic")
    mats = [O.stress_energy(O.ObservableRequest(dom, xi=0.3), x).full for x in np.linspace(0.02, 0.98, 20)]
    return _diff(mats, np.diag([-PI / 6, -PI / 6]), 1e-12)


def check_spectral_sum(opts):
    tol = opts.get("tail_tol", 1e-12)
    worst = 0.0
    for bc in S.BOUNDARY_CONDITIONS:
        dom = S.segment(1.0, bc)
        exact = K.closed_form_cylinder(dom)
        approx = K.spectral_cylinder(S.segment_model(1.0, bc), tail_tol=tol)
        for t in (0.25, 1.0, 4.0):
            for x, y in ((0.3, 0.6), (0.5, 0.5), (0.1, 0.85)):
                worst = max(worst, abs(approx(t, x, y) - exact(t, x, y)))
    return worst < 1e-11, f"max |sum - closed form| {worst:.3e} with tail_tol {tol:g}"


def check_cross_method(opts):
    worst = 0.0
    for bc in S.BOUNDARY_CONDITIONS:
        dom = S.segment(1.0, bc)
        T = K.closed_form_cylinder(dom)
        for x in (0.15, 0.35, 0.5, 0.7, 0.9):
            r = C.hankel_residue_D(K.expand_at_zero(T, x), 1).real
            q, _ = C.dirichlet_continued(C.kernel_mellin_spec(dom, x), -0.5, n=2)
            worst = max(worst, abs(q - r))
    return worst < 1e-7, f"max |quadrature - residue| {worst:.3e}"


def check_green_route(opts):
    worst = 0.0
    for d in (1, 2, 3):
        k = K.closed_form_cylinder(S.free_space(d))
        for t in (0.3, 1.0, 2.5):
            for r in (0.2, 0.7, 1.5):
                x = np.zeros(d)
                y = np.zeros(d)
                y[0] = r
                worst = max(worst, abs(k(t, x, y) - K.greens_route_cylinder(d, t, x, y)))
    return worst < 1e-12, f"max diff {worst:.3e}"


def check_deformation(opts):
    slopes = [O.deformation_slope(O.ObservableRequest(S.segment(1.0, bc))) for bc in ("dirichlet", "dirichlet_neumann")]
    return all(abs(s - 2.0) <= 0.05 for s in slopes), f"slopes {slopes}"


def check_density(opts):
    errs = [O.conformal_density_integral(S.segment(1.0, bc)) - e for bc, e in SEGMENT_ENERGIES.items()]
    return _diff(errs, 0.0, 1e-9)


def check_weyl(opts):
    exps = [S.weyl_check(S.segment_model(1.0, bc), 400).fitted_exponent for bc in S.BOUNDARY_CONDITIONS]
    return all(abs(p - 1.0) <= 0.01 for p in exps), f"exponents {[round(p, 5) for p in exps]}"


CHECKS = (
    Check("stress_energy_dirichlet_exact", "fast", check_stress_dirichlet),
    Check("nonconformal_dirichlet", "fast", check_nonconformal),
    Check("segment_energies", "fast", check_energies),
    Check("boundary_forces", "fast", check_forces),
    Check("periodic_translation_invariance", "fast", check_periodic),
    Check("spectral_sum_vs_closed_form", "fast", check_spectral_sum),
    Check("free_space_green_route", "fast", check_green_route),
    Check("deformation_identity", "fast", check_deformation),
    Check("mellin_vs_residue", "full", check_cross_method),
    Check("energy_density_integral", "full", check_density),
    Check("weyl_exponents", "full", check_weyl),
)


def run_checks(level: str = "fast", **opts) -> list:
    levels = ("fast",) if level == "fast" else ("fast", "full")
    out = []
    for chk in CHECKS:
        if chk.level not in levels:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = chk.fn(opts)
        except Exception as exc:  # a crash is a failed check with its message
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(chk.name, bool(ok), detail, time.perf_counter() - t0))
    return out
