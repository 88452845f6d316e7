import csv

import pytest

from polewave import cli
from polewave.report import parse_report_csv


def test_preset_writes_outputs(tmp_path, capsys):
    assert cli.main(["preset", "model-b", "--out", str(tmp_path)]) == 0
    rows = parse_report_csv(tmp_path / "report.csv")
    assert rows[0].label == "res" and abs(sum(rows[0].X) - 1) < 1e-6
    assert (tmp_path / "profile_res_ls.csv").exists() and (tmp_path / "profile_res_schr.csv").exists()
    assert "E_pole" in capsys.readouterr().out


def test_runs_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["preset", "model-b", "--out", str(tmp_path / d)]) == 0
    for f in ("report.csv", "profile_res_ls.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_mesh_check_output(tmp_path):
    assert cli.main(["preset", "model-c", "--out", str(tmp_path), "--mesh-check"]) == 0
    with (tmp_path / "mesh_check.csv").open() as fh:
        recs = list(csv.DictReader(fh))
    assert recs and all(r["ok"] == "1" for r in recs)


def test_bound_scan_from_config(tmp_path):
    cfg = tmp_path / "ws.ini"
    cfg.write_text("[potential]\nmodel = woods-saxon\n[kinematics]\nch1 = 1115.7, 39049.5, NR\n"
                   "[numerics]\nn = 120\n")
    assert cli.main(["bound", "--config", str(cfg), "--L", "0", "1", "--depth", "40", "--out", str(tmp_path / "o")]) == 0
    labels = [r.label for r in parse_report_csv(tmp_path / "o" / "report.csv")]
    assert labels == ["L0n0", "L0n1", "L1n0"]


def test_scan_and_optical(tmp_path):
    assert cli.main(["scan", "--preset", "model-c", "--values", "0", "-0.5", "--out", str(tmp_path)]) == 0
    assert [r.v1 for r in parse_report_csv(tmp_path / "scan.csv")] == [0.0, -0.5]
    assert cli.main(["check-optical", "--preset", "model-c", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "optical.csv").read_text().startswith("E_MeV,optical_residual")


@pytest.mark.parametrize("argv", [
    ["resonance", "--config", "/nonexistent/run.ini"],
    ["preset", "model-a", "--theta", "30"],
    ["resonance", "--config", "CFG"],
    ["scan", "--preset", "model-d", "--values", "0"],
    ["scan", "--preset", "model-a", "--param", "mu", "--values", "1"],
])
def test_configuration_errors_exit_2(tmp_path, argv):
    cfg = tmp_path / "r.ini"
    cfg.write_text("[potential]\nmodel = woods-saxon\n[kinematics]\nch1 = 1115.7, 39049.5, NR\n"
                   "[numerics]\nn = 40\n[spectrum]\ns = 0, 40142\n")
    argv = [str(cfg) if a == "CFG" else a for a in argv]
    assert cli.main(argv) == 2


def test_solver_failure_exit_3(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[potential]\nmodel = double-gaussian\n[kinematics]\nch1 = 938.9, 938.9, NR\n"
                   "[numerics]\nscale = 150\nq_max = 1500\ntheta = 20\n[spectrum]\nres = 0, 1950+40j\n")
    assert cli.main(["resonance", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_unwritable_output_exit_2(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert cli.main(["preset", "model-b", "--out", str(blocker / "x")]) == 2
