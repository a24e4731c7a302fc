import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from neumann_lens.grid import RadialDomain, build_grid
from neumann_lens.qualitative import check_monotone
from neumann_lens.shooting import (
    ShootingConfig,
    ShootingError,
    compatibility_defect,
    integrate_radial,
    natural_amplitude,
    shoot,
    trajectory_energy,
)
from neumann_lens.variational import level_record, minimize_L0

from conftest import u0_closed_form

INTERVAL = RadialDomain(0.0, math.pi, 1)


def test_linear_case_is_cosine():
    for s in (1.0, -3.0):
        tr = integrate_radial(1.0, s, INTERVAL, 2000)
        assert np.max(np.abs(tr.u - s * np.cos(tr.r))) < 1e-11 * abs(s)
        assert abs(tr.m) < 1e-10 * abs(s)
        assert tr.du[0] == 0.0
        assert tr.first_zero == pytest.approx(math.pi / 2, abs=1e-10)


def test_sign_case_closed_form(goldens):
    s = goldens["interval_u0_start"]
    tr = integrate_radial(0.0, s, INTERVAL, 1000)
    assert np.max(np.abs(tr.u - u0_closed_form(tr.r))) < 1e-10
    assert abs(tr.m) < 1e-10
    assert tr.crossings == 1
    assert tr.first_zero == pytest.approx(math.pi / 2, abs=1e-12)
    assert trajectory_energy(tr) == pytest.approx(goldens["interval_I0"], rel=1e-10)
    comp, ref = compatibility_defect(tr)
    assert abs(comp) <= 1e-10 * ref


def test_shoot_sign_case_matches_descent(goldens, interval_grid):
    rec = shoot(0.0, INTERVAL)
    assert rec.converged and rec.monotone
    assert rec.s == pytest.approx(-math.pi**2 / 8, rel=1e-9)
    assert rec.energy == pytest.approx(goldens["interval_I0"], rel=1e-9)
    assert rec.energy == pytest.approx(minimize_L0(interval_grid).level, rel=1e-4)


def test_variational_boundary_value_closes(annulus_grid, annulus):
    _, u, *_ = level_record(3.0, annulus_grid)
    tr = integrate_radial(3.0, -u.values[0], annulus, 8000)
    assert abs(tr.m) <= 1e-4 * np.max(np.abs(tr.du))


def test_annulus_p3_goldens(annulus, goldens):
    gold = goldens["annulus_p3"]
    rec = shoot(3.0, annulus)
    assert rec.s == pytest.approx(gold["s"], rel=1e-8)
    assert rec.energy == pytest.approx(gold["energy"], rel=1e-6)
    assert rec.first_zero == pytest.approx(gold["r0"], rel=1e-8)


def test_annulus_p05_goldens(annulus, goldens):
    gold = goldens["annulus_p0.5"]
    rec = shoot(0.5, annulus)
    assert rec.s == pytest.approx(gold["s"], rel=1e-6)
    assert rec.energy == pytest.approx(gold["energy"], rel=1e-6)


def test_interval_p3_matches_level():
    rec = shoot(3.0, INTERVAL)
    lvl, *_ = level_record(3.0, build_grid(INTERVAL, 2000))
    assert rec.monotone and rec.crossings == 1
    assert rec.energy == pytest.approx(lvl.L_p, rel=1e-3)


@pytest.mark.parametrize("p", [0.5, 3.0, 6.0, 31.0])
def test_annulus_solutions_are_monotone_and_balanced(annulus, p):
    rec = shoot(p, annulus)
    assert rec.converged
    assert check_monotone(rec.trajectory.u, 1e-10)[0]
    assert rec.compatibility <= 1e-6
    assert rec.residual <= 1e-4


def test_supercritical_standalone(annulus):
    rec = shoot(6.0, annulus)
    assert rec.converged and rec.monotone and rec.residual <= 1e-4
    assert rec.crossings == 1


@given(st.sampled_from([0.5, 2.0, 3.0, 6.0]), st.floats(0.3, 3.0), st.sampled_from([1, 3, 4]))
def test_scaling_covariance(p, s, N):
    lam = 2.0
    k = lam ** ((p - 1) / 2)
    d = RadialDomain(1.0, 2.5, N)
    ds = RadialDomain(d.a / k, d.b / k, N)
    t1 = integrate_radial(p, s, d, 400)
    t2 = integrate_radial(p, lam * s, ds, 400)
    assert not t1.blown and not t2.blown
    assert np.allclose(t2.u, lam * t1.u, rtol=1e-8, atol=1e-8 * lam * abs(s))


def test_ball_series_start():
    d = RadialDomain(0.0, 1.0, 3)
    tr = integrate_radial(1.0, 1.0, d, 2000)
    ref = np.sinc(tr.r / math.pi)  # sin(r)/r solves u'' + 2u'/r + u = 0
    assert np.max(np.abs(tr.u - ref)) < 1e-10


def test_overflow_is_flagged(annulus):
    tr = integrate_radial(61.0, 50.0, annulus, 2000)
    assert tr.blown and math.isnan(tr.m)


def test_errors():
    with pytest.raises(ValueError):
        shoot(1.0, INTERVAL)
    with pytest.raises(ValueError):
        shoot(3.0, RadialDomain(0, 1, 4))  # p_c = 3 in dimension four
    with pytest.raises(ValueError):
        integrate_radial(2.0, 0.0, INTERVAL)
    with pytest.raises(ShootingError):
        shoot(3.0, INTERVAL, ShootingConfig(s_range=(1e-3, 1e-2), n_scan=5))


def test_natural_amplitude():
    assert natural_amplitude(3.0, RadialDomain(0, 2, 1)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        natural_amplitude(1.0, INTERVAL)
