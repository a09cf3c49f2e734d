import csv
import io
import json
import math

import pytest

from laguerre_poisson import (
    SemigroupParams,
    eigenfunction_datum,
    heat_kernel,
    poisson_kernel,
    subordination_multiplier,
)
from laguerre_poisson.cli import ExperimentConfig, main


def run(tmp_path, *args, name="out.txt"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, (out.read_text() if out.exists() else "")


def rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def trailer(text):
    return dict(ln[2:].split("=", 1) for ln in text.splitlines() if ln.startswith("# "))


ONE_POINT = ["--set", "n=1", "--set", "lo=1.3", "--set", "hi=1.3", "--set", "t=0.5",
             "--set", "alpha=0.5", "--set", "nu=0.75"]


def test_kernel_one_point_matches_library(tmp_path):
    code, text = run(tmp_path, "kernel", *ONE_POINT)
    assert code == 0
    (row,) = rows(text)
    p = SemigroupParams(0.5, 0.0, 0.75)
    assert float(row["heat"]) == heat_kernel(p, 0.5, 1.3, 1.3)
    assert float(row["poisson"]) == poisson_kernel(p, 0.5, 1.3, 1.3)
    assert trailer(text)["pass"] == "true"


def test_kernel_default_grid(tmp_path):
    code, text = run(tmp_path, "kernel", "--set", "n=4")
    assert code == 0
    for r in rows(text):
        heat, series, tail = float(r["heat"]), float(r["heat_series"]), float(r["tail"])
        assert abs(heat - series) <= max(1e-9 * heat, tail)
        assert 0 < float(r["ratio"]) < math.inf


def test_determinism(tmp_path):
    args = ["transfer", "--set", "system=psi", "--set", "n_samples=4", "--seed", "11"]
    _, a = run(tmp_path, *args)
    _, b = run(tmp_path, *args)
    assert a == b and a


def test_converge_eigenfunction_oracle(tmp_path):
    code, text = run(tmp_path, "converge", "--set", "f=phi0", "--set", "x=0.5,1",
                     "--set", "t=0.4,0.2,0.1")
    assert code == 0
    p = SemigroupParams(0.0)
    phi0 = eigenfunction_datum(p)
    for r in rows(text):
        t, x = float(r["t"]), float(r["x"])
        want = abs(subordination_multiplier(p.nu, t, p.lambda0) - 1) * phi0(x)
        assert float(r["error"]) == pytest.approx(want, rel=1e-6)


def test_converge_rejects_fast_growth(tmp_path):
    code, text = run(tmp_path, "converge", "--set", "f=exp_square")
    assert code == 4 and text == ""


@pytest.mark.parametrize("args", [
    ["kernel", "--set", "bogus=1"],
    ["kernel", "--set", "alpha=-2"],
    ["kernel", "--set", "alpha"],
    ["kernel", "--config", "/nonexistent/cfg.txt"],
    ["frobnicate"],
])
def test_config_errors(tmp_path, args):
    assert run(tmp_path, *args)[0] == 2


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("# comment\nalpha = 0.25\nnu = 1.5\nseed = 4\n")
    code, text = run(tmp_path, "kernel", "--config", str(cfg), "--set", "nu=0.5", "--seed", "9",
                     *ONE_POINT[:8])
    meta = trailer(text)
    assert code == 0
    assert meta["alpha"] == "0.25" and meta["nu"] == "0.5" and meta["seed"] == "9"


def test_m_parametrization():
    cfg = ExperimentConfig()
    cfg.update("alpha", "0.5")
    cfg.update("m", "1")
    assert cfg.params().mu == pytest.approx(2 * 1 - 0.5 - 1)


def test_transfer_psi(tmp_path):
    code, text = run(tmp_path, "transfer", "--set", "system=psi", "--set", "n_samples=5")
    assert code == 0
    checks = {r["check"] for r in rows(text)}
    assert {"kernel_relation", "eigen_transport", "phi_consistency"} <= checks


def test_transfer_square_map_table_mismatch(tmp_path):
    code, text = run(tmp_path, "transfer", "--set", "system=frak_l", "--set", "n_samples=3")
    assert code == 1
    bad = [r for r in rows(text) if r["pass"] == "false"]
    assert bad and all(r["check"] == "phi_consistency" for r in bad)


def test_weights_json(tmp_path):
    code, text = run(tmp_path, "weights", "--set", "w=one", "--set", "n_f=6", "--set", "n_x=12")
    assert code in (0, 1)
    d = json.loads(text)
    assert {"config", "rows", "fitted", "pass"} <= d.keys()
    assert d["fitted"]["collapse"]["max_deviation"] <= 1e-8
    assert d["fitted"]["poisson_pipeline"]["v_member"] is True
    assert d["fitted"]["carleson_jones"]["sandwich"] is True
    assert d["config"]["w"] == "one"
