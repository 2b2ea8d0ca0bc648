"""Command line front end.

    zetavac run CONFIG [--out PATH] [--format json|csv] [--set key=value ...]
    zetavac selftest [--full] [--tail-tol TOL]
    zetavac expand CONFIG --point X --order N [--kind K] [--stencil I,J] [--exact]

Exit codes: 0 ok, 1 config error, 2 computation error, 3 selftest failure.
The worker count for grid evaluation is read from ZETAVAC_WORKERS.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any

import numpy as np

from . import __version__
from . import continuation as C
from . import kernels as K
from . import observables as O
from .checks import run_checks
from .config import ScenarioConfig, load
from .errors import ConfigError, ZetaVacError

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_SELFTEST = 0, 1, 2, 3
WORKERS_ENV = "ZETAVAC_WORKERS"


def fmt(v: float) -> str:
    """17 significant digits, lowercase e-notation."""
    return format(float(v), ".16e")


def tagged(value, method: str) -> dict:
    return {"value": float(np.real(value)), "method": method}


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(WORKERS_ENV, f"expected an integer, got {raw!r}") from None


def _pmap(fn, items):
    n = _workers()
    if n == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# report assembly ----------------------------------------------------------------------

def _stress_rows(cfg: ScenarioConfig) -> list:
    dom = cfg.domain()

    def row(x):
        exact = cfg.exact and cfg.d2 == 0
        xv = Fraction(x).limit_denominator(10**6) if exact else x
        if exact and float(xv) != x:
            exact, xv = False, x
        try:
            v = O.stress_energy(O.ObservableRequest(dom, cfg.xi, kappa=cfg.kappa, exact=exact), xv)
        except ZetaVacError:
            if not exact:
                raise
            v = O.stress_energy(O.ObservableRequest(dom, cfg.xi, kappa=cfg.kappa), x)
        d = v.full.shape[0]
        out = {"x": tagged(x, "input")}
        for i in range(d):
            out[f"T{i}{i}"] = tagged(v.full[i, i], v.method)
            out[f"T{i}{i}_conformal"] = tagged(v.conformal_part[i, i], v.method)
            out[f"T{i}{i}_nonconformal"] = tagged(v.nonconformal_part[i, i], v.method)
        out["T01"] = tagged(v.full[0, 1], "structural")
        if v.exact_entries:
            out["exact"] = {k: {"at_xi0": str(c), "xi_slope": str(s)} for k, (c, s) in v.exact_entries.items()}
        if v.pole_flags:
            out["pole_flags"] = {k: {"gamma_ratio_pole": p, "pole_order": o, "ln_kappa_coefficient": float(l)}
                                 for k, (p, o, l) in v.pole_flags.items()}
        return out

    return _pmap(row, cfg.x_grid)


def _energies(cfg: ScenarioConfig) -> dict:
    req = O.ObservableRequest(cfg.domain(), cfg.xi, kappa=cfg.kappa, exact=cfg.exact and cfg.d2 == 0)
    rep = O.energy_report(req)
    out = {
        "bulk": tagged(rep.bulk, rep.method_tags["bulk"]),
        "boundary": tagged(rep.boundary, rep.method_tags["boundary"]),
        "total": tagged(rep.total, rep.method_tags["total"]),
        "kappa_dependent": bool(rep.pole_order > 0),
        "gamma_ratio_pole": bool(rep.gamma_ratio_pole),
        "ln_kappa_coefficient": tagged(rep.ln_kappa_coefficient, rep.method_tags["bulk"]),
    }
    if rep.exact_bulk is not None:
        out["bulk_exact"] = str(rep.exact_bulk)
    return out


def _forces(cfg: ScenarioConfig) -> dict:
    if cfg.d2 != 0:
        raise ConfigError("outputs", "forces are reported for segments only")
    rep = O.boundary_force(O.ObservableRequest(cfg.domain(), cfg.xi))
    out = {}
    for e in rep.entries:
        out[fmt(e.point)] = {
            "normal": e.normal,
            "at_boundary": tagged(e.at_boundary, "residue"),
            "interior_limit": tagged(e.interior_limit, "richardson"),
        }
    out["agreement_gap"] = tagged(rep.agreement_gap, "difference")
    return out


def _trace(cfg: ScenarioConfig) -> dict:
    base = cfg.domain().base if cfg.d2 else cfg.domain()
    tf = K.trace_function(base)
    e = tf.expand(order=cfg.precision.truncation_order)
    tr = C.trace_residue(e, 1)
    out = {"tr_A_half": tagged(tr, "residue"), "values": {}}
    for t in (0.25, 1.0, 4.0):
        out["values"][fmt(t)] = {
            "closed_form": tagged(tf(t), "closed_form"),
            "spectral_sum": tagged(K.spectral_trace(tf.model, "cylinder", t, tail_tol=cfg.precision.tail_tol), "spectral_sum"),
        }
    return out


def _expansion_rows(cfg: ScenarioConfig) -> dict:
    base = cfg.domain().base if cfg.d2 else cfg.domain()
    T = K.closed_form_cylinder(base)
    out = {}
    for x in cfg.x_grid:
        e = K.expand_at_zero(T, x, order=cfg.precision.truncation_order)
        out[fmt(x)] = {str(k): tagged(e.series.coefficient(k), "exact_closed_form") for k in e.series.orders}
    return out


def _deformation(cfg: ScenarioConfig) -> dict:
    if cfg.d2 != 0:
        raise ConfigError("outputs", "the deformation check is reported for segments only")
    req = O.ObservableRequest(cfg.domain(), cfg.xi)
    res = {fmt(d): tagged(O.deformation_consistency(req, d), "residue") for d in cfg.deformation_deltas}
    out = {"residuals": res}
    if len(cfg.deformation_deltas) >= 2:
        out["slope"] = tagged(O.deformation_slope(req, cfg.deformation_deltas), "fit")
    return out


BUILDERS = {
    "stress_energy": _stress_rows,
    "energies": _energies,
    "forces": _forces,
    "trace": _trace,
    "kernel_expansion": _expansion_rows,
    "deformation_check": _deformation,
}


def run(cfg: ScenarioConfig) -> dict:
    """Evaluate every requested output; deterministic for a fixed config."""
    tables = {name: BUILDERS[name](cfg) for name in cfg.outputs}
    meta = {
        "version": __version__,
        "config": cfg.echo(),
        "kappa": cfg.kappa,
    }
    return {"metadata": meta, "tables": tables}


# serialization -------------------------------------------------------------------------

_MARK = "\x00f:"


def _mark_floats(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _mark_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_mark_floats(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _MARK + fmt(obj)
    return str(obj)


def to_json(report: dict) -> str:
    text = json.dumps(_mark_floats(report), sort_keys=True, indent=2)
    return re.sub(r'"\\u0000f:([^"]*)"', r"\1", text) + "\n"


def _flatten(prefix: str, obj, rows: list):
    if isinstance(obj, dict) and set(obj) == {"value", "method"}:
        rows.append((prefix, fmt(obj["value"]), obj["method"]))
        return
    if isinstance(obj, dict):
        for k in sorted(obj, key=str):
            _flatten(f"{prefix}/{k}" if prefix else str(k), obj[k], rows)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}/{i}", v, rows)
    elif isinstance(obj, float):
        rows.append((prefix, fmt(obj), ""))
    else:
        rows.append((prefix, str(obj), ""))


def to_csv(report: dict) -> str:
    rows: list = []
    _flatten("", report["tables"], rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value", "method"])
    w.writerows(rows)
    return buf.getvalue()


# entry point ----------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zetavac", description="Renormalized vacuum observables for segments and slabs.")
    sub = p.add_subparsers(dest="verb", required=True)
    r = sub.add_parser("run", help="evaluate a scenario config")
    r.add_argument("config")
    r.add_argument("--out")
    r.add_argument("--format", choices=("json", "csv"))
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    s = sub.add_parser("selftest", help="run the built-in verification suite")
    s.add_argument("--full", action="store_true")
    s.add_argument("--tail-tol", type=float, default=1e-12)
    e = sub.add_parser("expand", help="dump small-t kernel expansion coefficients")
    e.add_argument("config")
    e.add_argument("--point", type=str, required=True)
    e.add_argument("--order", type=int, default=8)
    e.add_argument("--kind", choices=("cylinder", "modified_cylinder"), default="cylinder")
    e.add_argument("--stencil", default="0,0")
    e.add_argument("--exact", action="store_true")
    e.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return p


def _write(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_run(args) -> int:
    cfg = load(args.config, args.set)
    report = run(cfg)
    fmt_name = args.format or cfg.format
    _write(to_json(report) if fmt_name == "json" else to_csv(report), args.out)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    results = run_checks("full" if args.full else "fast", tail_tol=args.tail_tol)
    failed = 0
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        failed += not r.ok
        print(f"{status} {r.name}: {r.detail} [{r.seconds:.2f}s]")
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_SELFTEST


def _cmd_expand(args) -> int:
    cfg = load(args.config, args.set)
    base = cfg.domain().base if cfg.d2 else cfg.domain()
    try:
        stencil = tuple(int(v) for v in args.stencil.split(","))
        if len(stencil) != 2:
            raise ValueError
    except ValueError:
        raise ConfigError("--stencil", "expected two integers like 1,1") from None
    try:
        point = Fraction(args.point) if args.exact else float(args.point)
    except ValueError:
        raise ConfigError("--point", f"not a number: {args.point!r}") from None
    T = K.closed_form_cylinder(base)
    k = T if args.kind == "cylinder" else K.modified_from_cylinder(T)
    e = K.expand_at_zero(k.with_stencil(stencil), point, order=args.order, exact=args.exact)
    coeffs = {}
    for j in e.series.orders:
        entry = {
            "plain": tagged(e.series.coefficient(j), "exact_closed_form"),
            "log": tagged(e.series.log_coefficient(j), "exact_closed_form"),
        }
        if e.exact is not None:
            entry["exact"] = str(e.exact.coefficient(j))
        coeffs[str(j)] = entry
    doc = {
        "metadata": {"version": __version__, "kind": args.kind, "stencil": list(stencil), "point": str(args.point),
                     "order": args.order, "domain": {"a": cfg.a, "bc": cfg.bc}},
        "coefficients": coeffs,
    }
    _write(to_json(doc), None)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.verb == "run":
            return _cmd_run(args)
        if args.verb == "selftest":
            return _cmd_selftest(args)
        return _cmd_expand(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ZetaVacError as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
