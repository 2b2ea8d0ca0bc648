import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from zetavac import cli
from zetavac.config import ScenarioConfig, apply_override, from_dict, load
from zetavac.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "scripts" / "configs"
PI = math.pi
EXPECTED_INV_PI = "1*pi^-1"


def run_cli(*args, env=None):
    import os
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "zetavac", *args], capture_output=True, text=True, env=e, timeout=600)


def test_run_json_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli("run", str(CONFIGS / "dirichlet_segment.yaml"), "--out", str(a)).returncode == 0
    assert run_cli("run", str(CONFIGS / "dirichlet_segment.yaml"), "--out", str(b)).returncode == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    e = doc["tables"]["energies"]
    assert abs(e["total"]["value"] + PI / 24) < 1e-12
    assert e["bulk_exact"] == "-1/24*pi"
    row = doc["tables"]["stress_energy"][0]
    assert row["exact"]["T00"]["at_xi0"] == "-1/24*pi"


def test_worker_count_invariance(tmp_path):
    outs = []
    for w in ("1", "4"):
        p = tmp_path / f"w{w}.json"
        r = run_cli("run", str(CONFIGS / "periodic_grid.yaml"), "--out", str(p), env={"ZETAVAC_WORKERS": w})
        assert r.returncode == 0, r.stderr
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_csv_matches_json_bitwise():
    cfg = load(CONFIGS / "dn_deformation.json")
    report = cli.run(cfg)
    js = json.loads(cli.to_json(report))
    rows = list(csv.DictReader(io.StringIO(cli.to_csv(report))))
    assert rows
    for r in rows:
        node = js["tables"]
        for k in r["key"].split("/"):
            node = node[int(k)] if isinstance(node, list) else node[k]
        if r["method"]:
            assert float(r["value"]) == node["value"]
            assert r["method"] == node["method"]


def test_float_format_roundtrip():
    for v in (PI / 24, -1e-300, 0.1):
        assert float(cli.fmt(v)) == v


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("domain: {kind: segment, a: 1.0, bc: robin}\n")
    r = run_cli("run", str(bad))
    assert r.returncode == 1
    assert "bc" in r.stderr
    r = run_cli("run", str(CONFIGS / "dirichlet_segment.yaml"), "--set", "domain.a=-2")
    assert r.returncode == 1


def test_config_validation():
    with pytest.raises(ConfigError) as ei:
        from_dict({"domain": {"kind": "segment"}, "outputs": ["nope"]})
    assert ei.value.field == "outputs[0]"
    with pytest.raises(ConfigError):
        from_dict({"domain": {"kind": "segment"}, "colour": 3})
    cfg = from_dict({"domain": {"kind": "segment", "a": 2.0}, "x_grid": {"count": 3, "margin": 0.5}})
    assert isinstance(cfg, ScenarioConfig)
    assert len(cfg.x_grid) == 3 and min(cfg.x_grid) >= 0.5 and max(cfg.x_grid) <= 1.5
    d = apply_override({"domain": {"kind": "segment"}}, "domain.bc=neumann")
    assert d["domain"]["bc"] == "neumann"
    assert apply_override({}, "xi=0.25")["xi"] == 0.25


def test_truncation_order_limit(tmp_path):
    cfg = tmp_path / "deep.yaml"
    cfg.write_text("domain: {kind: segment, a: 1.0, bc: dirichlet}\noutputs: [kernel_expansion]\n"
                   "precision: {truncation_order: 40}\n")
    r = run_cli("run", str(cfg))
    assert r.returncode == 1
    assert "truncation_order" in r.stderr


def test_computation_error_exit_code():
    # cos(2 pi / 7) is irrational, so the exact expansion is refused
    r = run_cli("expand", str(CONFIGS / "dirichlet_segment.yaml"), "--point", "1/7", "--order", "3", "--exact")
    assert r.returncode == 2
    assert "SeriesDomainViolation" in r.stderr


def test_selftest_pass_and_fail():
    ok = run_cli("selftest")
    assert ok.returncode == 0
    assert "8/8 checks passed" in ok.stdout
    bad = run_cli("selftest", "--tail-tol", "1")
    assert bad.returncode == 3
    assert "FAIL spectral_sum_vs_closed_form" in bad.stdout


def test_expand_exact():
    r = run_cli("expand", str(CONFIGS / "dirichlet_segment.yaml"), "--point", "1/2", "--order", "3", "--exact")
    assert r.returncode == 0, r.stderr
    doc = json.loads(r.stdout)
    assert doc["coefficients"]["-1"]["exact"] == EXPECTED_INV_PI
    assert abs(doc["coefficients"]["-1"]["plain"]["value"] - 1 / PI) < 1e-15


def test_expand_bad_stencil():
    r = run_cli("expand", str(CONFIGS / "dirichlet_segment.yaml"), "--point", "0.3", "--stencil", "1")
    assert r.returncode == 1
