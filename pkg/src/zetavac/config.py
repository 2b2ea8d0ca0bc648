"""Scenario configuration: a YAML or JSON document plus dotted overrides.

Grammar (all keys optional except ``domain``)::

    domain:
      kind: segment          # segment | slab (slab = segment base x R^d2)
      a: 1.0
      bc: dirichlet          # dirichlet | neumann | dirichlet_neumann | periodic
      d2: 0                  # free transverse dimensions, kind: slab needs d2 >= 1
    xi: 0.0
    kappa: 1.0
    exact: false             # rational-in-pi arithmetic where possible
    x_grid: [0.25, 0.5]      # or {count: 5, margin: 0.1}
    outputs: [stress_energy, energies]
    format: json             # json | csv
    deformation_deltas: [1.0e-2, 1.0e-3, 1.0e-4]
    precision:
      tail_tol: 1.0e-12
      truncation_order: 8
      quadrature_budget: 1.0e-11

Overrides use ``key.path=value`` with the value parsed as YAML.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .spectrum import BOUNDARY_CONDITIONS, DomainDescriptor, normalize_bc, segment, slab

OUTPUTS = ("stress_energy", "energies", "forces", "trace", "kernel_expansion", "deformation_check")
FORMATS = ("json", "csv")


@dataclass(frozen=True)
class Precision:
    tail_tol: float = 1e-12
    truncation_order: int = 8
    quadrature_budget: float = 1e-11


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "segment"
    a: float = 1.0
    bc: str = "dirichlet"
    d2: int = 0
    xi: float = 0.0
    kappa: float = 1.0
    exact: bool = False
    x_grid: tuple = (0.5,)
    outputs: tuple = ("energies",)
    format: str = "json"
    deformation_deltas: tuple = (1e-2, 1e-3, 1e-4)
    precision: Precision = field(default_factory=Precision)

    def domain(self) -> DomainDescriptor:
        base = segment(self.a, self.bc)
        return slab(base, self.d2) if self.d2 > 0 else base

    def echo(self) -> dict:
        d = asdict(self)
        d["x_grid"] = list(self.x_grid)
        d["outputs"] = list(self.outputs)
        d["deformation_deltas"] = list(self.deformation_deltas)
        return d


def _num(path: str, v, positive: bool = False, integer: bool = False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        try:
            v = float(v)
        except (TypeError, ValueError):
            raise ConfigError(path, f"expected a number, got {v!r}") from None
    if not math.isfinite(v):
        raise ConfigError(path, "must be finite")
    if integer:
        if float(v) != int(v):
            raise ConfigError(path, f"expected an integer, got {v!r}")
        v = int(v)
    if positive and not v > 0:
        raise ConfigError(path, f"must be positive, got {v!r}")
    return v


def _grid(raw, a: float) -> tuple:
    if isinstance(raw, (list, tuple)):
        pts = tuple(float(_num(f"x_grid[{i}]", v)) for i, v in enumerate(raw))
    elif isinstance(raw, dict):
        unknown = set(raw) - {"count", "margin"}
        if unknown:
            raise ConfigError(f"x_grid.{sorted(unknown)[0]}", "unknown key")
        count = _num("x_grid.count", raw.get("count", 5), positive=True, integer=True)
        margin = _num("x_grid.margin", raw.get("margin", 0.1 * a), positive=True)
        if 2 * margin >= a:
            raise ConfigError("x_grid.margin", "margin leaves no interior points")
        if count == 1:
            pts = (a / 2,)
        else:
            step = (a - 2 * margin) / (count - 1)
            pts = tuple(margin + k * step for k in range(count))
    else:
        raise ConfigError("x_grid", "expected a list of points or {count, margin}")
    for i, x in enumerate(pts):
        if not (0 < x < a):
            raise ConfigError(f"x_grid[{i}]", f"point {x} is not inside (0, {a})")
    return pts


def from_dict(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("", "config must be a mapping")
    known = {"domain", "xi", "kappa", "exact", "x_grid", "outputs", "format", "precision", "deformation_deltas"}
    for k in doc:
        if k not in known:
            raise ConfigError(k, "unknown key")
    dom = doc.get("domain")
    if not isinstance(dom, dict):
        raise ConfigError("domain", "missing or not a mapping")
    for k in dom:
        if k not in ("kind", "a", "bc", "d2"):
            raise ConfigError(f"domain.{k}", "unknown key")
    kind = str(dom.get("kind", "segment"))
    if kind not in ("segment", "slab"):
        raise ConfigError("domain.kind", f"expected segment or slab, got {kind!r}")
    a = float(_num("domain.a", dom.get("a", 1.0), positive=True))
    try:
        bc = normalize_bc(dom.get("bc", "dirichlet"))
    except ValueError:
        raise ConfigError("domain.bc", f"unknown boundary condition {dom.get('bc')!r}; expected one of {', '.join(BOUNDARY_CONDITIONS)}") from None
    d2 = _num("domain.d2", dom.get("d2", 0), integer=True)
    if d2 < 0:
        raise ConfigError("domain.d2", "must be >= 0")
    if kind == "slab" and d2 < 1:
        raise ConfigError("domain.d2", "a slab needs d2 >= 1")
    if kind == "segment" and d2 != 0:
        raise ConfigError("domain.d2", "a segment has d2 = 0; use kind: slab")
    xi = float(_num("xi", doc.get("xi", 0.0)))
    kappa = float(_num("kappa", doc.get("kappa", 1.0), positive=True))
    exact = doc.get("exact", False)
    if not isinstance(exact, bool):
        raise ConfigError("exact", "expected true or false")
    outputs = doc.get("outputs", ["energies"])
    if isinstance(outputs, str):
        outputs = [outputs]
    for i, o in enumerate(outputs):
        if o not in OUTPUTS:
            raise ConfigError(f"outputs[{i}]", f"unknown output {o!r}; expected one of {', '.join(OUTPUTS)}")
    fmt = doc.get("format", "json")
    if fmt not in FORMATS:
        raise ConfigError("format", f"expected json or csv, got {fmt!r}")
    prec = doc.get("precision", {}) or {}
    if not isinstance(prec, dict):
        raise ConfigError("precision", "expected a mapping")
    for k in prec:
        if k not in ("tail_tol", "truncation_order", "quadrature_budget"):
            raise ConfigError(f"precision.{k}", "unknown key")
    precision = Precision(
        tail_tol=float(_num("precision.tail_tol", prec.get("tail_tol", 1e-12), positive=True)),
        truncation_order=_num("precision.truncation_order", prec.get("truncation_order", 8), positive=True, integer=True),
        quadrature_budget=float(_num("precision.quadrature_budget", prec.get("quadrature_budget", 1e-11), positive=True)),
    )
    if precision.truncation_order > 16:
        raise ConfigError("precision.truncation_order", "at most 16")
    deltas = doc.get("deformation_deltas", [1e-2, 1e-3, 1e-4])
    deltas = tuple(float(_num(f"deformation_deltas[{i}]", v, positive=True)) for i, v in enumerate(deltas))
    return ScenarioConfig(
        kind=kind, a=a, bc=bc, d2=d2, xi=xi, kappa=kappa, exact=exact,
        x_grid=_grid(doc.get("x_grid", [a / 2]), a),
        outputs=tuple(outputs), format=fmt, deformation_deltas=deltas, precision=precision,
    )


def apply_override(doc: dict, assignment: str) -> dict:
    """Apply ``key.path=value`` in place (value parsed as YAML)."""
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like key.path=value")
    path, raw = assignment.split("=", 1)
    keys = path.strip().split(".")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(path, f"cannot parse value: {exc}") from None
    node = doc
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value
    return doc


def load(path: str | Path, overrides=()) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read {p}: {exc}") from None
    try:
        doc = json.loads(text) if p.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError("", f"cannot parse {p}: {exc}") from None
    doc = doc or {}
    for o in overrides:
        apply_override(doc, o)
    return from_dict(doc)
