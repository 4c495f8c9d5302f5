import json
from pathlib import Path

import pytest

from proxsweep.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def cfg(name):
    return str(CONFIGS / name)


def test_solve_ramp_then_certify(tmp_path):
    assert main(["solve", "--config", cfg("ramp.ini"), "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert rows[0].startswith("#") and rows[1] == "t,x1" and rows[-1] == "2.0,1.0"
    assert (tmp_path / "refinement_log.csv").exists()
    code = main(["certify", "--config", cfg("ramp.ini"), "--trajectory", str(tmp_path / "trajectory.csv"),
                 "--out", str(tmp_path / "cert")])
    assert code == 0
    cert = json.loads((tmp_path / "cert" / "certificate.json").read_text())
    assert cert["verdict"] == "Solution"
    assert (tmp_path / "cert" / "residual.csv").read_text().startswith("t,mass,norm_v,m,cumulative_R")


def test_certify_wrong_trajectory_exit_1(tmp_path):
    traj = tmp_path / "wrong.csv"
    traj.write_text("t,x1\n0.0,0.0\n0.5,0.0\n1.0,3.0\n1.5,3.0\n2.0,3.0\n")
    code = main(["certify", "--config", cfg("jump.ini"), "--trajectory", str(traj), "--out", str(tmp_path / "c")])
    assert code == 1
    cert = json.loads((tmp_path / "c" / "certificate.json").read_text())
    assert cert["verdict"] == "NotSolution" and cert["worst_time"] == 1.0


def test_certify_infeasible_or_malformed_exit_3(tmp_path):
    traj = tmp_path / "bad.csv"
    traj.write_text("t,x1\n0.0,0.0\n1.0,1.5\n2.0,2.0\n")
    assert main(["certify", "--config", cfg("jump.ini"), "--trajectory", str(traj), "--out", str(tmp_path)]) == 3
    traj.write_text("time,x\n")
    assert main(["certify", "--config", cfg("jump.ini"), "--trajectory", str(traj), "--out", str(tmp_path)]) == 3
    assert main(["certify", "--config", cfg("jump.ini"), "--trajectory", str(tmp_path / "none.csv"),
                 "--out", str(tmp_path)]) == 3
    traj.write_text("t,x1\n0.0,0.0\n1.0,2.0\n")  # wrong horizon
    assert main(["certify", "--config", cfg("jump.ini"), "--trajectory", str(traj), "--out", str(tmp_path)]) == 3


def test_step_out_of_reach_exit_2(tmp_path, capsys):
    assert main(["solve", "--config", cfg("hole_teleport.ini"), "--out", str(tmp_path)]) == 2
    assert "prox reach" in capsys.readouterr().err


def test_missing_key_exit_3(tmp_path, capsys):
    assert main(["solve", "--config", cfg("missing_x0.ini"), "--out", str(tmp_path)]) == 3
    assert "x0" in capsys.readouterr().err


def test_budget_exhausted_exit_4(tmp_path):
    assert main(["solve", "--config", cfg("ramp.ini"), "--out", str(tmp_path), "--tol", "1e-12"]) == 4
    assert (tmp_path / "trajectory.csv").exists()
    assert len((tmp_path / "refinement_log.csv").read_text().splitlines()) == 14


def test_converge_and_frozen_grid(tmp_path):
    assert main(["converge", "--config", cfg("ramp_converge.ini"), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "converge_RAMP.csv").exists() and (tmp_path / "converge_RAMP.json").exists()
    assert main(["converge", "--config", cfg("ramp_frozen.ini"), "--out", str(tmp_path / "f")]) == 4


def test_converge_requires_family(tmp_path):
    assert main(["converge", "--config", cfg("ramp.ini"), "--out", str(tmp_path)]) == 3


def test_stability(tmp_path):
    assert main(["stability", "--config", cfg("sine_stability.ini"), "--out", str(tmp_path), "--nmax", "64"]) == 0
    data = json.loads((tmp_path / "stability_SINE-PLAY.json").read_text())
    assert data["ok"] and data["n_max"] == 64


def test_verify_seeded(tmp_path):
    for sub in ("a", "b"):
        assert main(["verify", "--config", cfg("hole_verify.ini"), "--out", str(tmp_path / sub), "--seed", "3"]) == 0
    assert (tmp_path / "a" / "verify.csv").read_bytes() == (tmp_path / "b" / "verify.csv").read_bytes()
    main(["verify", "--config", cfg("hole_verify.ini"), "--out", str(tmp_path / "c"), "--seed", "4"])
    assert (tmp_path / "a" / "verify.csv").read_bytes() != (tmp_path / "c" / "verify.csv").read_bytes()


def test_solve_with_target_refines(tmp_path):
    assert main(["solve", "--config", cfg("hole.ini"), "--out", str(tmp_path), "--tol", "0.05"]) == 0
    log = (tmp_path / "refinement_log.csv").read_text().splitlines()
    assert len(log) > 2 and abs(float(log[-1].split(",")[2])) <= 0.05


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert "RAMP" in out and "HOLE" in out and "rho=1" in out


def test_unknown_verb():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
