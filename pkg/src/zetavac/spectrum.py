"""Spectral data of A = -Laplacian on the supported domains (V = 0).

Discrete models enumerate eigenvalues omega_k^2 in nondecreasing order
together with eigenfunctions and their derivatives. Neumann and periodic
segments act on the mean-zero subspace, so the constant mode is dropped and
every omega_k is strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson

from .errors import InsufficientSpectrum, NonPositiveLength, UnsupportedDomain

BC_ALIASES = {
    "dirichlet": "dirichlet",
    "d": "dirichlet",
    "dd": "dirichlet",
    "neumann": "neumann",
    "n": "neumann",
    "nn": "neumann",
    "dirichlet_neumann": "dirichlet_neumann",
    "dirichletneumann": "dirichlet_neumann",
    "dirichlet-neumann": "dirichlet_neumann",
    "dn": "dirichlet_neumann",
    "periodic": "periodic",
    "p": "periodic",
}
BOUNDARY_CONDITIONS = ("dirichlet", "dirichlet_neumann", "neumann", "periodic")


def normalize_bc(bc: str) -> str:
    key = str(bc).strip().lower().replace(" ", "")
    if key not in BC_ALIASES:
        raise ValueError(f"unknown boundary condition {bc!r}")
    return BC_ALIASES[key]


@dataclass(frozen=True)
class DomainDescriptor:
    """Spatial domain. ``kind`` is one of segment, free_space, half_space,
    product or slab; the potential is fixed to zero."""

    kind: str
    a: float | None = None
    bc: str | None = None
    d: int | None = None
    left: "DomainDescriptor | None" = None
    right: "DomainDescriptor | None" = None
    base: "DomainDescriptor | None" = None
    free_dims: int = 0
    potential: float = 0.0

    def __post_init__(self):
        if self.kind == "segment":
            if self.a is None or not (self.a > 0):
                raise NonPositiveLength(f"segment length must be positive, got {self.a}")
            object.__setattr__(self, "bc", normalize_bc(self.bc))
        elif self.kind in ("free_space", "half_space"):
            if self.d is None or self.d < 1:
                raise UnsupportedDomain(f"{self.kind} needs d >= 1")
        elif self.kind == "product":
            if self.left is None or self.right is None:
                raise UnsupportedDomain("product needs two factors")
        elif self.kind == "slab":
            if self.base is None:
                raise UnsupportedDomain("slab needs a base domain")
            if self.free_dims < 1:
                raise UnsupportedDomain("slab needs free_dims >= 1")
        else:
            raise UnsupportedDomain(f"unknown domain kind {self.kind!r}")
        if self.potential != 0:
            raise UnsupportedDomain("only V = 0 is supported")

    @property
    def dimension(self) -> int:
        if self.kind == "segment":
            return 1
        if self.kind in ("free_space", "half_space"):
            return int(self.d)
        if self.kind == "product":
            return self.left.dimension + self.right.dimension
        return self.base.dimension + self.free_dims


def segment(a: float, bc: str) -> DomainDescriptor:
    return DomainDescriptor("segment", a=a, bc=bc)


def free_space(d: int) -> DomainDescriptor:
    return DomainDescriptor("free_space", d=d)


def half_space(d: int) -> DomainDescriptor:
    return DomainDescriptor("half_space", d=d)


def product(left: DomainDescriptor, right: DomainDescriptor) -> DomainDescriptor:
    return DomainDescriptor("product", left=left, right=right)


def slab(base: DomainDescriptor, free_dims: int) -> DomainDescriptor:
    return DomainDescriptor("slab", base=base, free_dims=free_dims)


@dataclass(frozen=True)
class EigenData:
    omega: float
    eval: Callable
    eval_deriv: Callable
    eval_deriv2: Callable | None = None
    multiplicity_tag: str = ""


@dataclass(frozen=True)
class SpectralModel:
    """A discrete spectral model; see :func:`segment_model` and :func:`product_model`.

    ``frequencies(n)`` returns the first n omega_k, ``modes(x, n, order)`` the
    values of d^order F_k at x for those modes. ``sup_bound`` is a constant
    B with |d^m F_k| <= B omega_k^m everywhere.
    """

    dimension: int
    domain: DomainDescriptor
    zero_mode_removed: bool
    frequencies: Callable[[int], np.ndarray]
    modes: Callable[..., np.ndarray]
    sup_bound: float
    volume: float
    labels: Callable[[int], list] = field(default=lambda n: [str(k) for k in range(n)])

    def enumerate(self, k: int) -> EigenData:
        """Eigen data of the k-th mode (0-based)."""
        omega = float(self.frequencies(k + 1)[k])
        tag = self.labels(k + 1)[k]
        return EigenData(
            omega=omega,
            eval=lambda x: self.modes(x, k + 1, 0)[k],
            eval_deriv=lambda x: self.modes(x, k + 1, 1)[k],
            eval_deriv2=lambda x: self.modes(x, k + 1, 2)[k],
            multiplicity_tag=tag,
        )

    def __iter__(self):
        k = 0
        while True:
            yield self.enumerate(k)
            k += 1


def segment_model(a: float, bc: str) -> SpectralModel:
    """Eigenmodes of -d^2/dx^2 on (0, a) under the given boundary condition."""
    if not (a > 0):
        raise NonPositiveLength(f"segment length must be positive, got {a}")
    bc = normalize_bc(bc)
    dom = segment(a, bc)
    amp = math.sqrt(2.0 / a)

    if bc == "periodic":
        def signed_k(n):
            j = np.arange(n)
            m = j // 2 + 1
            return np.where(j % 2 == 0, m, -m) * (2.0 * math.pi / a)

        def freqs(n):
            return np.abs(signed_k(n))

        def modes(x, n, order=0):
            k = signed_k(n)
            return (1j * k) ** order * np.exp(1j * k * x) / math.sqrt(a)

        def labels(n):
            j = np.arange(n)
            m = j // 2 + 1
            return [f"{'+' if jj % 2 == 0 else '-'}{mm}" for jj, mm in zip(j, m)]

        return SpectralModel(1, dom, True, freqs, modes, 1.0 / math.sqrt(a), a, labels)

    if bc == "dirichlet":
        def freqs(n):
            return np.arange(1, n + 1) * (math.pi / a)
        phase0 = 0.0
    elif bc == "dirichlet_neumann":
        def freqs(n):
            return (np.arange(n) + 0.5) * (math.pi / a)
        phase0 = 0.0
    else:
        def freqs(n):
            return np.arange(1, n + 1) * (math.pi / a)
        phase0 = math.pi / 2

    def modes(x, n, order=0):
        w = freqs(n)
        return amp * w ** order * np.sin(w * x + phase0 + order * math.pi / 2)

    return SpectralModel(1, dom, bc == "neumann", freqs, modes, amp, a)


def product_model(m1: SpectralModel, m2: SpectralModel) -> SpectralModel:
    """Tensor-product model: omega^2 = omega_1^2 + omega_2^2, F = F_1 F_2.

    Points are pairs (x1, x2); only undifferentiated modes are offered.
    """

    def pairs(n):
        w1 = m1.frequencies(n)
        w2 = m2.frequencies(n)
        lam = w1[:, None] ** 2 + w2[None, :] ** 2
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        order = np.lexsort((j.ravel(), i.ravel(), lam.ravel()))[:n]
        return np.sqrt(lam.ravel()[order]), i.ravel()[order], j.ravel()[order]

    def freqs(n):
        return pairs(n)[0]

    def modes(x, n, order=0):
        if order != 0:
            raise NotImplementedError("product models expose undifferentiated modes only")
        _, i, j = pairs(n)
        x1, x2 = x
        return m1.modes(x1, n, 0)[i] * m2.modes(x2, n, 0)[j]

    def labels(n):
        _, i, j = pairs(n)
        return [f"({a},{b})" for a, b in zip(i, j)]

    dom = product(m1.domain, m2.domain)
    return SpectralModel(
        m1.dimension + m2.dimension,
        dom,
        m1.zero_mode_removed and m2.zero_mode_removed,
        freqs,
        modes,
        m1.sup_bound * m2.sup_bound,
        m1.volume * m2.volume,
        labels,
    )


@dataclass(frozen=True)
class WeylReport:
    fitted_exponent: float
    fitted_constant: float
    expected_exponent: float
    expected_constant: float


def weyl_constant(d: int, volume: float) -> float:
    return 2.0 * math.sqrt(math.pi) * math.gamma(d / 2 + 1) ** (1.0 / d) * volume ** (-1.0 / d)


def weyl_check(model: SpectralModel, count: int) -> WeylReport:
    """Fit log omega_k = log C + p log k over the upper half of the first
    ``count`` frequencies."""
    if count < 50:
        raise InsufficientSpectrum("weyl_check needs count >= 50")
    w = np.asarray(model.frequencies(count), dtype=float)
    if len(w) < count:
        raise InsufficientSpectrum(f"model provides only {len(w)} eigenvalues")
    k = np.arange(1, count + 1)
    sel = slice(count // 2, count)
    p, logc = np.polyfit(np.log(k[sel]), np.log(w[sel]), 1)
    d = model.dimension
    return WeylReport(float(p), float(math.exp(logc)), 1.0 / d, weyl_constant(d, model.volume))


def gram_matrix(model: SpectralModel, n: int, panels: int = 2048) -> np.ndarray:
    """<F_j|F_k> for j, k < n by composite Simpson quadrature on a segment."""
    a = model.domain.a
    xs = np.linspace(0.0, a, 2 * panels + 1)
    vals = np.array([model.modes(x, n, 0) for x in xs])
    prod = np.conj(vals)[:, :, None] * vals[:, None, :]
    return simpson(prod, x=xs, axis=0)


def mode_means(model: SpectralModel, n: int, panels: int = 2048) -> np.ndarray:
    a = model.domain.a
    xs = np.linspace(0.0, a, 2 * panels + 1)
    vals = np.array([model.modes(x, n, 0) for x in xs])
    return simpson(vals, x=xs, axis=0) / a


def eigen_residual(model: SpectralModel, k: int, x: float, h: float = 1e-4) -> float:
    """Relative residual of -F'' = omega^2 F at x by central differences."""
    f = lambda y: model.modes(y, k + 1, 0)[k]
    fx = f(x)
    lap = -(f(x + h) - 2 * fx + f(x - h)) / h**2
    w2 = float(model.frequencies(k + 1)[k]) ** 2
    return abs(lap / fx - w2) / w2


def brute_force_product_spectrum(m1: SpectralModel, m2: SpectralModel, n: int) -> np.ndarray:
    """Sorted omega over all pairs from length-n prefixes (test oracle)."""
    vals = []
    for w1 in m1.frequencies(n):
        for w2 in m2.frequencies(n):
            vals.append(w1 * w1 + w2 * w2)
    return np.sqrt(np.sort(vals)[:n])


def as_model(domain: DomainDescriptor) -> SpectralModel:
    if domain.kind == "segment":
        return segment_model(domain.a, domain.bc)
    if domain.kind == "product":
        return product_model(as_model(domain.left), as_model(domain.right))
    raise UnsupportedDomain(f"{domain.kind} has no discrete spectral model")

