import json
import math

import numpy as np
import pytest

from anisohilbert import cli
from anisohilbert.io import dumps_report, read_field_csv, write_field_csv, SCHEMA_VERSION


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path))
    return tmp_path


def _report(out, name):
    return json.loads((out / f"{name}.json").read_text())


def test_rho_prints_two(out, capsys):
    assert cli.run(["rho", "--alpha", "1,2", "--x", "0,4"]) == 0
    assert capsys.readouterr().out.strip() == "2"
    rep = _report(out, "rho")
    assert rep["schema"] == SCHEMA_VERSION and rep["config"]["alpha"] == [1.0, 2.0]


def test_negative_values_are_not_flags(out, capsys):
    assert cli.run(["rho", "--alpha", "1,2", "--x", "-3,4"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(math.sqrt((9 + math.sqrt(145)) / 2))


@pytest.mark.parametrize("argv", [
    ["rho", "--alpha", "1,2", "--x", "0,4", "--bogus"],
    ["frobnicate"],
    [],
    ["rho", "--alpha", "one,two", "--x", "0,4"],
])
def test_usage_errors(out, argv):
    assert cli.run(argv) == cli.EXIT_USAGE


def test_compute_error(out):
    assert cli.run(["rho", "--alpha", "1,-2", "--x", "0,4"]) == cli.EXIT_ERROR


def test_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.run(["--out-dir", str(blocker / "sub"), "rho", "--alpha", "1,2", "--x", "0,4"]) == cli.EXIT_IO


def test_check_failure_exit(out):
    assert cli.run(["curve-check", "--gamma", "t_exp_inv"]) == cli.EXIT_CHECK
    assert cli.run(["curve-check", "--gamma", "pow:3"]) == 0
    assert _report(out, "curve-check")["report"]["best_C"] == pytest.approx(0.5)


def test_deterministic_reports(tmp_path):
    paths = []
    for d in ("a", "b"):
        assert cli.run(["--out-dir", str(tmp_path / d), "lp-system", "--alpha", "1,3", "--samples", "4000"]) == 0
        paths.append((tmp_path / d / "lp-system.json").read_bytes())
    assert paths[0] == paths[1]


def test_multiplier_subcommand(out, capsys):
    assert cli.run(["multiplier", "--gamma", "pow:2", "--z", "-1.5,1", "--xi", "1", "--eta", "-0.5"]) == 0
    assert _report(out, "multiplier")["value"][1] < 0
    assert cli.run(["multiplier", "--gamma", "pow:2", "--xi", "1,2"]) == cli.EXIT_USAGE


def test_ml_bounds_example(out):
    argv = ["ml-bounds", "--gamma", "pow:2", "--z", "-1.5,0", "--grid", "log:1e-2:1e2:33"]
    assert cli.run(argv) == 0
    reports = sorted(out.glob("ml_bounds_*_-1.5_0.json"))
    assert len(reports) == 4
    for p in reports:
        rep = json.loads(p.read_text())
        assert {"quantity", "sup_abs", "argmax", "bound", "pass", "coverage"} <= set(rep)
        assert rep["pass"]
    header = (out / "ml_bounds_m_-1.5_0.csv").read_text().splitlines()[0]
    assert header == "xi,eta,re,im"


def test_transform_round_trip(out):
    assert cli.run(["transform", "--grid", "32", "--route", "fourier", "--alpha", "1,3"]) == 0
    first = _report(out, "transform")
    assert {"route", "p", "value_space", "norm_in", "norm_out", "ratio"} <= set(first)
    src = out / "field.csv"
    x = np.linspace(-1, 1, 128, endpoint=False)
    X, Y = np.meshgrid(x, x, indexing="ij")
    v = np.sin(np.pi * (X + Y)) + np.cos(np.pi * (2 * X - Y))
    write_field_csv(src, [x, x], v, {"half_widths": [1.0, 1.0]}, {})
    assert cli.run(["transform", "--input", str(src), "--route", "both", "--stride", "16"]) == 0
    rep = _report(out, "transform")
    assert rep["rel_discrepancy"] <= 1e-2


def test_opnorm_and_kernel(out):
    assert cli.run(["opnorm", "--grid", "32", "--value-space", "S:3:3", "--p", "3", "--trials", "2"]) == 0
    assert _report(out, "opnorm")["estimate"] > 1
    assert cli.run(["kernel", "--grid", "4", "--points", "4", "--rho-c", "8"]) == 0
    axes, vals, side = read_field_csv(out / "K_z.csv")
    assert vals.shape == (4, 4, 1) and side["field"]["kind"] == "K_z"


def test_threads_flag(out):
    assert cli.run(["--threads", "1", "rho", "--alpha", "1,1", "--x", "3,4"]) == 0


def test_rotations_example(out):
    assert cli.run(["rotations", "--alpha", "1,2", "--omega", "cos", "--dirs", "64", "--grid", "256"]) == 0
    rep = _report(out, "rotations")
    assert rep["rel_discrepancy"] <= 1e-2
    assert {"l2_direct", "l2_rot", "rel_discrepancy", "n_dirs"} <= set(rep)
    assert (out / "t_omega_direct.csv").exists() and (out / "t_omega_rotations.csv.json").exists()


def test_dumps_report_sorted_and_plain():
    text = dumps_report({"b": np.float64(1.5), "a": 2 + 1j, "c": np.arange(2), "d": math.inf}, {"seed": 1})
    data = json.loads(text)
    assert list(data) == sorted(data)
    assert data["a"] == [2.0, 1.0] and data["c"] == [0, 1] and data["d"] == "inf"


def test_field_csv_round_trip(tmp_path):
    ax = [np.array([-1.0, 0.0]), np.array([0.5, 1.5, 2.5])]
    vals = np.arange(6).reshape(2, 3) + 1j
    write_field_csv(tmp_path / "f.csv", ax, vals, {"k": 1}, {"seed": 0})
    axes, back, side = read_field_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(back[..., 0], vals)
    assert side["field"] == {"k": 1} and side["config"] == {"seed": 0}
