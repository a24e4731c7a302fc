import json
import math

import numpy as np
import pytest

from neumann_lens.cli import main
from neumann_lens.grid import read_field_csv


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_eigen(capsys, tmp_path):
    code, out = run(capsys, "eigen", "--N", "1", "--a", "0", "--b", str(math.pi), "--M", "1000",
                    "--out", str(tmp_path / "psi.csv"))
    js = json.loads(out)
    assert code == 0 and js["mu"] == pytest.approx(1.0, abs=1e-5)
    psi = read_field_csv(tmp_path / "psi.csv")
    assert psi.values[0] == pytest.approx(math.sqrt(2 / math.pi), rel=1e-5)


def test_tune(capsys):
    code, out = run(capsys, "tune", "--N", "4", "--a", "1", "--target", "1", "--M", "1000")
    js = json.loads(out)
    assert code == 0 and js["b"] == pytest.approx(5.21021, abs=5e-3) and js["monotone"]


def test_solve(capsys, tmp_path):
    code, out = run(capsys, "solve", "--p", "3", "--N", "4", "--a", "1", "--b", "5.21021", "--M", "400",
                    "--out", str(tmp_path))
    js = json.loads(out)
    assert code == 0 and js["converged"]
    assert set(js) >= {"p", "L_p", "Lambda_p", "D_p", "duality_defect", "relation_defect", "flags"}
    assert js["duality_defect"] < 1e-3
    assert (tmp_path / "profile_p=3.csv").exists()
    code, out = run(capsys, "solve", "--p", "0", "--N", "1", "--a", "0", "--b", str(math.pi), "--M", "400",
                    "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["L_p"] < 0


def test_shoot(capsys, tmp_path):
    code, out = run(capsys, "shoot", "--p", "6", "--N", "4", "--a", "1", "--b", "5.21021", "--M-ode", "4000",
                    "--out", str(tmp_path))
    js = json.loads(out)
    assert code == 0 and js["converged"] and js["monotone"]
    text = (tmp_path / "trajectory_p=6.csv").read_text().splitlines()
    assert text[0] == "# N=4 a=1.0 b=5.21021" and text[1] == "r,u,du"
    data = np.loadtxt(text[2:], delimiter=",")
    assert data.shape == (4001, 3)


def test_shoot_failure_and_bad_input(capsys, tmp_path):
    code, out = run(capsys, "shoot", "--p", "3", "--N", "4", "--a", "0", "--b", "1", "--out", str(tmp_path))
    assert code == 2  # p >= p_c on a ball
    with pytest.raises(SystemExit):
        main(["eigen", "--N", "4"])


@pytest.mark.parametrize("check", ["monotone", "pohozaev", "rearrange", "nonexistence"])
def test_verify(capsys, check):
    argv = ["verify", "--check", check]
    if check == "nonexistence":
        argv += ["--a", "0", "--b", "1", "--p", "3"]
    if check == "rearrange":
        argv += ["--trials", "20"]
    code, out = run(capsys, *argv)
    js = json.loads(out)
    assert code == 0
    if check == "nonexistence":
        assert js["verdict"] == "no Neumann closure found"
    elif check == "monotone":
        assert js["monotone"]
    else:
        assert js["passed"]


def test_verify_profile_file(capsys, tmp_path):
    run(capsys, "solve", "--p", "2", "--N", "4", "--a", "1", "--b", "5.21021", "--M", "300",
        "--out", str(tmp_path))
    code, out = run(capsys, "verify", "--check", "monotone", "--profile", str(tmp_path / "profile_p=2.csv"))
    assert code == 0 and json.loads(out)["monotone"]
