import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import brentq, minimize_scalar

from neumann_lens.grid import RadialDomain, RadialField, build_grid, integrate
from neumann_lens.nonlinear_average import (
    balance,
    cp,
    odd_power,
    recenter,
    shift,
    sign_balance,
    weighted_median,
)

G = build_grid(RadialDomain(1, 5.21, 4), 64)
exponents = st.sampled_from([0.3, 0.5, 1.0, 2.0, 3.0, 6.0])


def field(seed):
    return RadialField(G, np.random.default_rng(seed).standard_normal(G.r.size))


def test_odd_power():
    assert np.array_equal(odd_power(np.array([-8.0, 0.0, 8.0]), 1 / 3), np.array([-2.0, 0.0, 2.0]))


def test_linear_case_is_mean_subtraction():
    w = field(1)
    assert cp(w, 1.0).c == pytest.approx(-integrate(G, w.values) / G.volume, abs=1e-13)


def test_constant_field():
    w = RadialField(G, np.full(G.r.size, 4.0))
    assert cp(w, 3.0).c == -4.0


@pytest.mark.parametrize("p", [0.2, 0.5, 2.0, 3.0, 11.0])
def test_matches_brent_oracle(p):
    w = field(7)
    g = lambda c: float(np.dot(G.cell, np.sign(w.values + c) * np.abs(w.values + c) ** p))
    ref = brentq(g, -w.values.max(), -w.values.min(), xtol=1e-15)
    res = cp(w, p)
    assert res.c == pytest.approx(ref, abs=1e-10)
    assert abs(res.residual) <= res.tolerance


@pytest.mark.parametrize("p", [0.5, 2.0, 3.0])
def test_minimizes_norm(p):
    w = field(3).values
    f = lambda c: np.dot(G.cell, np.abs(w + c) ** (p + 1))
    ref = minimize_scalar(f, bounds=(-w.max(), -w.min()), method="bounded", options={"xatol": 1e-12})
    assert cp(RadialField(G, w), p).c == pytest.approx(ref.x, abs=1e-6)


@given(st.integers(0, 2**32 - 1), exponents, st.floats(-10, 10), st.floats(0.1, 10))
def test_equivariance(seed, p, t, lam):
    w = field(seed)
    c = cp(w, p).c
    scale = np.max(np.abs(w.values)) + abs(t)
    assert cp(w + t, p).c == pytest.approx(c - t, abs=1e-9 * scale)
    assert cp(w * lam, p).c == pytest.approx(lam * c, abs=1e-9 * lam * scale)
    assert cp(-w, p).c == pytest.approx(-c, abs=1e-9 * scale)


@given(st.integers(0, 2**32 - 1), exponents)
def test_recentered_field_is_balanced(seed, p):
    u = recenter(field(seed), p)
    ref = integrate(G, np.abs(u.values) ** p)
    assert abs(balance(G, u.values, p)) <= 1e-9 * ref


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        shift(G, np.full(G.r.size, np.nan), 2.0)
    with pytest.raises(ValueError):
        shift(G, np.ones(G.r.size), 0.0)


@given(st.integers(0, 2**32 - 1))
def test_weighted_median_splits_volume(seed):
    w = field(seed).values
    m, k, frac = weighted_median(G, w)
    above = G.cell[w > m].sum() + frac * G.cell[k]
    assert above == pytest.approx(G.volume / 2, rel=1e-12)
    assert 0.0 <= frac <= 1.0


def test_sign_balance():
    g = build_grid(RadialDomain(0, math.pi, 1), 400)
    sb = sign_balance(g(np.cos))
    assert sb.member and sb.pos == pytest.approx(sb.neg, rel=1e-6)
    assert not sign_balance(g(lambda r: np.cos(r) + 0.5)).member
    one = sign_balance(g(lambda r: np.ones_like(r)), zero_band=0.0)
    assert one.pos == pytest.approx(math.pi) and one.neg == 0 and not one.member
    with pytest.raises(ValueError):
        sign_balance(g(np.cos), zero_band=-1.0)
