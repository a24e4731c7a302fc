import json
import math

import numpy as np
import pytest

from neumann_lens.cli import main
from neumann_lens.grid import RadialDomain, build_grid, read_field_csv
from neumann_lens.sweep import FIGURE1_P, LimitError, SweepConfig, limit_u1, sweep, write_outputs

from conftest import u0_closed_form

UNIT = RadialDomain(0.0, 1.0, 1)


def test_limit_u1_interval(interval, goldens):
    u1 = limit_u1(interval, 2000)
    ref = goldens["interval_kappa"] * math.sqrt(2 / math.pi) * np.cos(u1.grid.r)
    assert np.max(np.abs(u1.values - ref)) < 1e-4


def test_limit_u1_is_sign_covariant(interval_grid):
    from neumann_lens.eigen import log_normalization_constant, radial_eigenpair
    from neumann_lens.operators import laplacian_for

    psi = radial_eigenpair(laplacian_for(interval_grid)).psi
    assert log_normalization_constant(-psi) == log_normalization_constant(psi)
    assert np.array_equal((-psi * log_normalization_constant(-psi)).values,
                          -(psi * log_normalization_constant(psi)).values)


def test_limit_u1_rejects_mu_far_from_one():
    with pytest.raises(LimitError):
        limit_u1(UNIT, 200)


def test_near_one_on_interval(interval, goldens):
    rep = sweep([0.99, 1.0, 1.01], interval)
    assert rep.all_converged
    d = rep.diagnostics["p_to_1"]["relative_sup_distance"]
    assert all(v <= 5e-2 for v in d.values())
    assert rep.kappa == pytest.approx(goldens["interval_kappa"], rel=1e-5)
    assert rep.entries[1.0].method == "eigen"


def test_trichotomy_on_unit_interval():
    rep = sweep([0.5, 0.75, 0.9, 0.99, 1.01, 1.1, 1.25, 1.5], UNIT)
    t = rep.diagnostics["trend_near_1"]
    assert t["sup_decreasing_below"] and t["sup_increasing_toward_1_above"]
    assert t["abs_L_decreasing_below"] and t["L_increasing_toward_1_above"]
    assert all(e["L_p"] < 0 for e in t["below"])


def test_small_p_approaches_sign_solution(interval):
    rep = sweep([1e-3], interval)
    u = rep.entries[1e-3].u
    assert np.max(np.abs(u.values - u0_closed_form(u.grid.r))) < 1e-2
    assert rep.diagnostics["p_to_0"]["sup_distance"][1e-3] < 1e-2


def test_routing_and_sign_convention(annulus):
    rep = sweep([0, 0.5, 1, 3, 6], annulus, SweepConfig(M=500))
    methods = {p: e.method for p, e in rep.entries.items()}
    assert methods == {0.0: "shooting", 0.5: "variational", 1.0: "eigen", 3.0: "variational", 6.0: "shooting"}
    for e in rep.entries.values():
        assert e.converged and e.monotone and e.sign_changing
        assert e.u.values[0] < 0
    assert rep.p_values == sorted(rep.p_values)
    assert [x["p"] for x in rep.diagnostics["lambda_trace"]] == [0.5, 1.0, 3.0]


def test_failures_are_recorded():
    # p = 1 on a domain with mu != 1 has no solution; the sweep carries on
    rep = sweep([1.0, 2.0], UNIT, SweepConfig(M=200))
    assert not rep.entries[1.0].converged and rep.entries[1.0].error
    assert rep.entries[2.0].converged
    assert not rep.all_converged
    with pytest.raises(ValueError):
        sweep([-1.0], UNIT)


def test_outputs(tmp_path, annulus):
    rep = sweep([0.5, 3], annulus, SweepConfig(M=300))
    write_outputs(rep, tmp_path, figure=True)
    lines = (tmp_path / "levels.csv").read_text().splitlines()
    assert lines[0] == "p,L_p,Lambda_p,D_p,sup_norm,residual,monotone"
    assert len(lines) == 3
    prof = tmp_path / "profile_p=0.5.csv"
    assert prof.read_text().startswith(f"# N=4 a=1.0 b={annulus.b!r}")
    fld = read_field_csv(prof)
    assert np.array_equal(fld.values, rep.entries[0.5].u.values)
    js = json.loads((tmp_path / "report.json").read_text())
    assert js["all_converged"] and len(js["entries"]) == 2
    assert (tmp_path / "figure1.svg").read_text().lstrip().startswith("<?xml")


def test_cli_exit_code(tmp_path, annulus):
    ok = main(["sweep", "--N", "4", "--a", "1", "--b", repr(annulus.b), "--M", "300",
               "--p-list", "0.5", "3", "--out", str(tmp_path / "a")])
    assert ok == 0
    bad = main(["sweep", "--N", "1", "--a", "0", "--b", "1", "--M", "200",
                "--p-list", "1", "2", "--out", str(tmp_path / "b")])
    assert bad == 1


def test_figure_list():
    assert FIGURE1_P == (0, 0.5, 1, 1.5, 3, 6, 11, 31, 61)
