import json
import subprocess
import sys

import pytest
import yaml

from normsol import cli


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = cli.run([*args, "--out", str(out)])
    report = json.loads((out / "report.json").read_text())
    manifest = json.loads((out / "manifest.json").read_text())
    return code, report, manifest, out


def test_thresholds_happy_path(tmp_path):
    code, report, manifest, out = run(tmp_path, "thresholds", "--csv")
    assert code == 0
    assert report["R0"] < report["s_max"] < report["R1"]
    assert (out / "g_curve.csv").read_text().startswith("t,g")
    assert manifest["version"] and "wall_time" in manifest
    assert "wall_time" not in report


def test_reports_are_deterministic(tmp_path):
    _, a, _, _ = run(tmp_path, "bounds", "--queries", "200", "--seed", "5", name="a")
    _, b, _, _ = run(tmp_path, "bounds", "--queries", "200", "--seed", "5", name="b")
    assert a == b
    assert a["random"]["above_held"] == 200


def test_check_reports_tags(tmp_path):
    code, report, _, _ = run(tmp_path, "check")
    assert code == 0
    assert report["G_conditions"]["G3"]["pass"]


def test_unknown_command(tmp_path, capsys):
    assert cli.run(["frobnicate", "--out", str(tmp_path / "x")]) == 2
    assert "unknown command" in capsys.readouterr().err


def test_missing_model_file(tmp_path):
    code, report, _, _ = run(tmp_path, "thresholds", "--model", str(tmp_path / "nope.yaml"))
    assert code == 2
    assert "does not exist" in report["message"]


def test_malformed_config(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("rho: [1, 2\n")
    assert cli.run(["check", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    cfg.write_text("colour: blue\n")
    assert cli.run(["check", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_negative_option_rejected(tmp_path):
    assert cli.run(["ground", "--rho", "-1", "--out", str(tmp_path / "o")]) == 2


def test_model_file_and_config(tmp_path):
    model = tmp_path / "model.yaml"
    model.write_text(yaml.safe_dump({"family": "multipower", "N": 3,
                                     "subcritical": [[1.0, 7, 3]], "supercritical": [[1.0, 13, 3]]}))
    cfg = tmp_path / "run.yaml"
    cfg.write_text(yaml.safe_dump({"model": str(model), "rho": 0.8}))
    code, report, manifest, _ = run(tmp_path, "thresholds", "--config", str(cfg))
    assert code == 0 and report["rho"] == 0.8
    assert manifest["config"]["rho"] == 0.8


def test_excited_above_guard_fails_with_guard_value(tmp_path):
    code, report, _, _ = run(tmp_path, "excited")
    assert code == 3
    assert report["error"] == "RhoTooLargeError"
    assert report["guard"] == pytest.approx(0.70710678, rel=1e-6)


def test_ground_then_fiber(tmp_path):
    code, report, _, out = run(tmp_path, "ground", "--n", "1024", name="g")
    assert code == 0
    assert all(report["checks"].values())
    assert "th:locmin:lambda_positive" in report["tags"]
    code, fiber, _, fout = run(tmp_path, "fiber", "--field", str(out / "profile.csv"), name="f")
    assert code == 0 and fiber["J1J2"]["j1"]
    header = (fout / "fiber.csv").read_text().splitlines()[0]
    assert header == "s,phi,dphi,d2phi,classification"


def test_sweep(tmp_path):
    code, report, _, out = run(tmp_path, "sweep", "--count", "3", "--jobs", "2", "--n", "512")
    assert code == 0 and report["non_increasing"]
    assert len((out / "m_curve.csv").read_text().splitlines()) == 4


def test_evolve_needs_field(tmp_path):
    code, report, _, _ = run(tmp_path, "evolve")
    assert code == 2


@pytest.mark.slow
def test_evolve_blowup_exit_code(tmp_path):
    code, _, _, out = run(tmp_path, "excited", "--skip-guard", name="ex")
    assert code == 0
    code, report, _, bout = run(tmp_path, "evolve", "--field", str(out / "profile.csv"), "--s", "1.1", name="bu")
    assert code == 4
    assert report["blowup"] and report["before_T_star"]
    assert (bout / "trace.csv").read_text().startswith("t,mass,energy,gradnorm,V,M,dist")


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "normsol.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "thresholds" in res.stdout
