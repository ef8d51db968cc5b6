import glob
import json
import math
import os

import pytest

from kirchhoff.cli import PRESETS, main, parse_h
from kirchhoff.errors import ConfigError
from kirchhoff.sobolev import critical_coefficient, sobolev_constant
from kirchhoff.threshold import closed_form_oracle


def _report(out, command):
    runs = sorted(glob.glob(os.path.join(out, f"{command}-*")))
    with open(os.path.join(runs[-1], "report.json")) as fh:
        return json.load(fh), runs[-1]


def test_threshold_command(tmp_path, capsys):
    code = main(["threshold", "--h", "1 + 2*t", "--N", "3", "--out", str(tmp_path)])
    assert code == 0
    rep, _ = _report(tmp_path, "threshold")
    assert rep["result"]["c_star"] == pytest.approx(closed_form_oracle(3, 1, 2, 2), rel=1e-12)
    assert rep["config"]["h"] == "1 + 2*t" and rep["config"]["N"] == 3
    assert json.loads(capsys.readouterr().out) == rep


def test_malformed_h_points_at_token(capsys):
    code = main(["threshold", "--h", "1 + 2*x", "--N", "3"])
    assert code == 1
    err = capsys.readouterr().err
    lines = err.splitlines()
    caret = next(l for l in lines if l.strip() == "^")
    expr = next(l for l in lines if "h = 1 + 2*x" in l)
    assert expr[caret.index("^")] == "x"


@pytest.mark.parametrize("text,pos", [("1 + 2*t^", 8), ("1 2", 2), ("1 +", 3)])
def test_parse_errors(text, pos):
    with pytest.raises(ConfigError) as exc:
        parse_h(text, 3)
    lines = str(exc.value).splitlines()
    assert lines[2].index("^") - lines[1].index("=") - 2 == pos


def test_parse_h_terms():
    t = parse_h("1 + 2*t + 0.5 * Sc * t^2 + t^0.5", 4)
    assert t.coefficient_of(1.0) == 1.0
    assert t.coefficient_of(2.0) == 2.0
    assert t.coefficient_of(3.0) == pytest.approx(0.5 * critical_coefficient(4), rel=1e-15)
    assert t.coefficient_of(1.5) == 1.0
    assert parse_h("3e-1*t", 3).terms == ((0.3, 2.0),)


def test_reports_are_deterministic(tmp_path):
    args = ["threshold", "--preset", "n4-subthreshold", "--out", str(tmp_path)]
    assert main(args) == 0
    assert main(args) == 0
    runs = sorted(glob.glob(os.path.join(tmp_path, "threshold-*")))
    assert len(runs) == 2
    a, b = (open(os.path.join(r, "report.json"), "rb").read() for r in runs)
    assert a == b


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nh = 1 + 2*t\nN = 4\n")
    assert main(["threshold", "--config", str(cfg), "--N", "3", "--out", str(tmp_path)]) == 0
    rep, _ = _report(tmp_path, "threshold")
    assert rep["config"]["N"] == 3 and rep["config"]["h"] == "1 + 2*t"


def test_config_file_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("h = 1\nbogus = 3\n")
    assert main(["threshold", "--config", str(cfg)]) == 1
    assert "bad.cfg:2" in capsys.readouterr().err
    assert main(["threshold", "--h", "1", "--N", "2"]) == 1
    assert main(["threshold", "--h", "1", "--grid", "abc"]) == 1


def test_solve_brezis_nirenberg_preset(tmp_path):
    code = main(["solve", "--preset", "brezis-nirenberg-n4", "--lambda-frac", "0.5",
                 "--out", str(tmp_path)])
    assert code == 0
    rep, run = _report(tmp_path, "solve")
    sol = rep["result"]["solutions"][0]
    assert rep["result"]["mode"] == "mountain-pass"
    assert 0 < sol["energy"] < sobolev_constant(4) ** 2 / 4
    assert sol["residual"] < 1e-6
    for name in ("solution_1.csv", "trace_1.csv", "solutions.csv"):
        assert os.path.exists(os.path.join(run, name))


def test_precondition_failure_exit_code(tmp_path):
    code = main(["solve", "--h", "1", "--N", "4", "--lambda", "30", "--mode", "mountain-pass",
                 "--out", str(tmp_path)])
    assert code == 2
    rep, _ = _report(tmp_path, "solve")
    assert rep["error"]["type"] == "GeometryViolated"


def test_nonconvergence_exit_code(tmp_path):
    code = main(["solve", "--preset", "mountain-pass-n4", "--max-iter", "1", "--grid", "128",
                 "--out", str(tmp_path)])
    assert code == 3
    rep, run = _report(tmp_path, "solve")
    assert rep["result"]["solutions"][0]["status"] != "converged"
    assert os.path.exists(os.path.join(run, "solution_1.csv"))


def test_sweep_in_input_order(tmp_path):
    code = main(["sweep", "--preset", "n3-linear", "--vary", "h=1 + 3*t, 1 + 1*t, 1 + 2*t",
                 "--workers", "2", "--out", str(tmp_path), "--format", "csv"])
    assert code == 0
    rep, run = _report(tmp_path, "sweep")
    cases = rep["result"]["cases"]
    assert [c["h"] for c in cases] == ["1 + 3*t", "1 + 1*t", "1 + 2*t"]
    for c, b in zip(cases, (3, 1, 2)):
        assert c["c_star"] == pytest.approx(closed_form_oracle(3, 1, b, 2), rel=1e-10)
    with open(os.path.join(run, "sweep.csv")) as fh:
        assert len(fh.read().splitlines()) == 4


def test_conditions_and_eigen_commands(tmp_path):
    assert main(["conditions", "--preset", "two-solutions-n4", "--grid", "128", "--out", str(tmp_path)]) == 0
    rep, _ = _report(tmp_path, "conditions")
    assert rep["result"]["A4"]["status"] == "holds"
    assert main(["eigen", "--N", "3", "--grid", "512", "--out", str(tmp_path)]) == 0
    rep, _ = _report(tmp_path, "eigen")
    assert rep["result"]["radial"][0]["value"] == pytest.approx(math.pi ** 2, rel=5e-3)
    assert rep["result"]["ball"][1]["multiplicity"] == 3


def test_presets_resolve(tmp_path):
    for name in PRESETS:
        assert main(["threshold", "--preset", name, "--out", str(tmp_path)]) == 0
