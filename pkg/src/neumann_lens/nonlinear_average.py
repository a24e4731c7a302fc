"""The recentering map c_p and the measure balance used at p = 0.

For a field ``w`` and ``p > 0``, ``c_p(w)`` is the unique shift with
``int |w + c|^(p-1) (w + c) = 0``. The left side ``g(c)`` is strictly
increasing, ``g(-max w) <= 0 <= g(-min w)``, so bisection on that bracket
always succeeds. It is also the minimizer of ``c -> ||w + c||_{p+1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import RadialField, RadialGrid

MAX_BISECTIONS = 200


@dataclass(frozen=True)
class RecenterResult:
    c: float
    residual: float
    iterations: int
    tolerance: float


def odd_power(x: np.ndarray, p: float) -> np.ndarray:
    """|x|^(p-1) x, with the value 0 at x = 0 for every p >= 0."""
    return np.sign(x) * np.abs(x) ** p


def balance(grid: RadialGrid, w: np.ndarray, p: float, c: float = 0.0) -> float:
    """g(c) = int |w+c|^(p-1) (w+c)."""
    return _kernels.balance_residual(np.ascontiguousarray(w, dtype=float), grid.cell, float(p), float(c))


def shift(grid: RadialGrid, w: np.ndarray, p: float, tol: float = 1e-12, check: bool = False) -> RecenterResult:
    """Array-level c_p used by the solvers."""
    w = np.ascontiguousarray(w, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("non-finite values in w")
    if p <= 0:
        raise ValueError("c_p is only defined for p > 0")
    lo, hi = -float(w.max()), -float(w.min())
    if lo == hi:
        return RecenterResult(lo, 0.0, 0, tol)
    c, it = _kernels.bisect_shift(w, grid.cell, float(p), lo, hi, MAX_BISECTIONS)
    if p >= 1.0:
        # secant polish; bisection already sits within a few ulps
        g0 = balance(grid, w, p, c)
        slope = p * float(np.dot(grid.cell, np.abs(w + c) ** (p - 1)))
        if slope > 0 and np.isfinite(slope):
            c1 = c - g0 / slope
            if lo <= c1 <= hi and abs(balance(grid, w, p, c1)) < abs(g0):
                c = c1
    g = balance(grid, w, p, c)
    scale = float(np.dot(grid.cell, np.abs(w + c) ** (p + 1))) ** (p / (p + 1)) * grid.volume
    if check and abs(g) > tol * max(scale, np.finfo(float).tiny):
        raise ArithmeticError(f"recentering residual {g:.3e} above tolerance")
    return RecenterResult(float(c), g, it, tol * scale)


def cp(w: RadialField, p: float, tol: float = 1e-12) -> RecenterResult:
    """Recentering shift for a field, with the residual check enabled.

    The tolerance is relative: ``|g(c)| <= tol * ||w+c||_{p+1}^p * |Omega|``.
    """
    return shift(w.grid, w.values, p, tol, check=True)


def recenter(w: RadialField, p: float, tol: float = 1e-12) -> RadialField:
    """w + c_p(w)."""
    res = cp(w, p, tol)
    return RadialField(w.grid, w.values + res.c)


def weighted_median(grid: RadialGrid, w: np.ndarray) -> tuple[float, int, float]:
    """Split value for the p = 0 balance.

    Returns ``(value, index, fraction)``: sorting cells by decreasing ``w``,
    the cell at ``index`` straddles half the volume and ``fraction`` of its
    measure belongs to the upper half.
    """
    order = np.argsort(-w, kind="stable")
    cum = np.cumsum(grid.cell[order])
    half = 0.5 * cum[-1]
    k = int(np.searchsorted(cum, half))
    before = cum[k - 1] if k > 0 else 0.0
    frac = (half - before) / grid.cell[order[k]]
    return float(w[order[k]]), int(order[k]), float(frac)


@dataclass(frozen=True)
class SignBalance:
    pos: float
    neg: float
    zero: float
    member: bool


def _measure_above(grid: RadialGrid, u: np.ndarray, t: float) -> float:
    """|{u > t}| using linear interpolation on each interval."""
    d = grid.domain
    r0, r1 = grid.r[:-1], grid.r[1:]
    u0, u1 = u[:-1] - t, u[1:] - t
    total = 0.0
    both = (u0 > 0) & (u1 > 0)
    total += float(np.sum(d.shell(r0[both], r1[both])))
    cross = (u0 > 0) != (u1 > 0)
    if np.any(cross):
        a0, a1 = u0[cross], u1[cross]
        rc = r0[cross] + (r1[cross] - r0[cross]) * a0 / (a0 - a1)
        up = a0 > 0
        total += float(np.sum(d.shell(r0[cross][up], rc[up])))
        total += float(np.sum(d.shell(rc[~up], r1[cross][~up])))
    return total


def sign_balance(u: RadialField, zero_band: float | None = None, atol: float = 1e-9) -> SignBalance:
    """Measures of {u > eps}, {u < -eps}, {|u| <= eps} and membership in M_0.

    The field is read as piecewise linear between nodes. With
    ``zero_band=None`` the band is the largest jump between neighbours,
    i.e. ``h * max|u'|``. Membership allows ``atol * |Omega|`` slack.
    """
    grid = u.grid
    v = u.values
    eps = float(np.max(np.abs(np.diff(v)))) if zero_band is None else float(zero_band)
    if eps < 0:
        raise ValueError("zero band must be nonnegative")
    vol = grid.domain.volume
    pos = _measure_above(grid, v, eps)
    neg = _measure_above(grid, -v, eps)
    zero = max(vol - pos - neg, 0.0)
    member = abs(pos - neg) <= zero + atol * vol
    return SignBalance(pos, neg, zero, bool(member))
