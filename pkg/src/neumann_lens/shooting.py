"""Radial solutions by shooting on the initial value.

The radial equation ``u'' + (N-1)/r u' = -|u|^(p-1) u`` is integrated
from ``r = a`` with ``u(a) = s`` and ``u'(a) = 0`` by fixed-step RK4. On a
ball the first step uses the series

    u(r) = s + c2 r^2 + c4 r^4,  c2 = -g(s)/(2N),  c4 = g'(s) g(s) / (8N(N+2)),

with ``g(s) = |s|^(p-1) s``, which avoids the ``1/r`` singularity. For
``p = 0`` the sign is frozen on each segment and zeros are located by
bisection inside the step. A Neumann solution is a root of the terminal
slope ``m(s) = u'(b)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq
from scipy.special import roots_jacobi

from . import _kernels
from .grid import RadialDomain, RadialField, RadialGrid

log = logging.getLogger(__name__)

OVERFLOW = 1e100


class ShootingError(RuntimeError):
    """No single-crossing bracket of the terminal slope was found."""


@dataclass
class ShootingTrajectory:
    p: float
    s: float
    domain: RadialDomain
    r: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    du: np.ndarray = field(repr=False)
    m: float
    crossings: int
    first_zero: float
    blown: bool

    @property
    def slope_scale(self) -> float:
        return float(np.max(np.abs(self.du)))

    def spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.r, self.u, self.du)

    def slope_at(self, r0: float) -> float:
        return float(self.spline()(r0, 1))

    def to_field(self, grid: RadialGrid) -> RadialField:
        """Values on the nodes of ``grid`` (same interval, any spacing)."""
        d = grid.domain
        if (d.a, d.b, d.N) != (self.domain.a, self.domain.b, self.domain.N):
            raise ValueError("grid is on a different domain")
        if self.blown:
            raise ValueError("trajectory blew up before r = b")
        return RadialField(grid, self.spline()(grid.r))


@dataclass
class ShootingConfig:
    """Scan and root-finding controls.

    ``s_range`` is the scan range for ``|s|`` in units of the natural
    amplitude ``length^(-2/(p-1))`` (1 for p = 0 and huge p); ``n_scan``
    points per sign on a geometric grid.
    """

    M_ode: int = 8000
    s_range: tuple = (1e-3, 1e3)
    n_scan: int = 240
    tol: float = 1e-10
    event_tol: float = 1e-12
    overflow: float = OVERFLOW
    signs: tuple = (-1.0, 1.0)
    refine_depth: int = 6


@dataclass
class SolutionRecord:
    p: float
    domain: RadialDomain
    s: float
    m: float
    trajectory: ShootingTrajectory = field(repr=False)
    energy: float
    residual: float
    compatibility: float
    crossings: int
    first_zero: float
    monotone: bool
    converged: bool
    candidates: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = self.domain
        return {
            "p": self.p,
            "N": d.N, "a": d.a, "b": d.b,
            "s": self.s,
            "m": self.m,
            "energy": self.energy,
            "residual": self.residual,
            "compatibility": self.compatibility,
            "crossings": self.crossings,
            "first_zero": self.first_zero,
            "monotone": self.monotone,
            "converged": self.converged,
            "sup_norm": float(np.max(np.abs(self.trajectory.u))),
            "candidates": self.candidates,
            "flags": list(self.flags),
        }


def _g(s: float, p: float) -> float:
    if p == 0:
        return math.copysign(1.0, s) if s != 0 else 0.0
    return math.copysign(abs(s) ** p, s)


def _count_crossings(u: np.ndarray) -> tuple[int, int]:
    """Number of sign changes and the index before the first one."""
    sg = np.sign(u)
    nz = np.nonzero(sg)[0]
    if nz.size < 2:
        return 0, -1
    flips = np.nonzero(sg[nz[:-1]] != sg[nz[1:]])[0]
    if flips.size == 0:
        return 0, -1
    return int(flips.size), int(nz[flips[0]])


def _zero_in_step(r, u, v, k: int, b: float) -> float:
    """Zero of u in [r_k, r_{k+1}] on the cubic Hermite interpolant.

    Falls back to linear interpolation when the interpolant does not
    bracket numerically (huge slopes on an overflowing trajectory).
    """
    if u[k] * u[k + 1] >= 0:
        return float(r[k + 1])
    spl = CubicHermiteSpline(r[k:k + 2], u[k:k + 2], v[k:k + 2])
    if spl(r[k]) * spl(r[k + 1]) < 0:
        return float(brentq(spl, r[k], r[k + 1], xtol=1e-15 * max(1.0, b)))
    return float(r[k] + (r[k + 1] - r[k]) * u[k] / (u[k] - u[k + 1]))


def integrate_radial(p: float, s: float, domain: RadialDomain, M_ode: int = 4000,
                     overflow: float = OVERFLOW, event_tol: float = 1e-12) -> ShootingTrajectory:
    """One trajectory from ``u(a) = s``, ``u'(a) = 0``, sampled at ``M_ode + 1`` nodes."""
    if s == 0:
        raise ValueError("s = 0 gives the trivial solution")
    if p < 0:
        raise ValueError("p must be nonnegative")
    a, b, N = domain.a, domain.b, domain.N
    h = (b - a) / M_ode
    if domain.is_ball:
        g = _g(s, p)
        dg = 0.0 if p == 0 else p * abs(s) ** (p - 1)
        c2 = -g / (2 * N)
        c4 = dg * g / (8 * N * (N + 2))
        u1 = s + c2 * h**2 + c4 * h**4
        v1 = 2 * c2 * h + 4 * c4 * h**3
        u, v, n_valid, blown = _kernels.rk4_radial(h, h, M_ode - 1, u1, v1, float(p), int(N), overflow, event_tol)
        u = np.concatenate(([s], u))
        v = np.concatenate(([0.0], v))
        n_valid += 1
    else:
        u, v, n_valid, blown = _kernels.rk4_radial(a, h, M_ode, float(s), 0.0, float(p), int(N), overflow, event_tol)
    r = a + h * np.arange(M_ode + 1)
    r[-1] = b
    if blown:
        r, u, v = r[:n_valid], u[:n_valid], v[:n_valid]
    n_cross, k = _count_crossings(u)
    r0 = math.nan
    if n_cross:
        r0 = _zero_in_step(r, u, v, k, b)
    m = float(v[-1]) if not blown else math.nan
    return ShootingTrajectory(p, float(s), domain, r, u, v, m, n_cross, r0, bool(blown))


def natural_amplitude(p: float, domain: RadialDomain) -> float:
    """Amplitude scale length^(-2/(p-1)) from the scaling of the equation."""
    if p == 1:
        raise ValueError("no natural amplitude at p = 1")
    length = domain.b - domain.a
    e = -2.0 / (p - 1)
    lg = e * math.log(length)
    return math.exp(min(max(lg, -600.0), 600.0))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)


def _weighted_power_integral(tr: ShootingTrajectory, q: float, odd: bool) -> float:
    """sigma int r^(N-1) |u|^q (sgn u if odd) dr on the Hermite interpolant.

    Four-point Gauss-Legendre on every interval; the interval holding the
    first zero is split there and each half uses Gauss-Jacobi with the
    weight |r - r0|^q, which absorbs the kink of |u|^q.
    """
    d = tr.domain
    r = tr.r
    spl = tr.spline()

    def integrand(x):
        v = spl(x)
        f = np.abs(v) ** q
        if odd:
            f = np.sign(v) * f
        return d.sigma * x ** (d.N - 1) * f

    lo, hi = r[:-1], r[1:]
    k = -1
    r0 = tr.first_zero
    if tr.crossings >= 1 and math.isfinite(r0):
        k = int(np.clip(np.searchsorted(r, r0) - 1, 0, r.size - 2))
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = integrand(x.ravel()).reshape(x.shape) @ _GL_W * half
    if k < 0:
        return float(vals.sum())
    vals[k] = 0.0
    total = float(vals.sum())
    xj, wj = roots_jacobi(6, 0.0, q)  # weight (1 + t)^q, zero on the left
    for left, right, sign in ((r0, r[k + 1], 1.0), (r[k], r0, -1.0)):
        length = right - left
        if length <= 0:
            continue
        t = xj if sign > 0 else -xj
        xs = left + 0.5 * length * (1 + t)
        dist = np.abs(xs - r0)
        v = spl(xs)
        g = np.abs(v / dist) ** q
        if odd:
            g = np.sign(v) * g
        g = d.sigma * xs ** (d.N - 1) * g
        total += float(np.dot(wj, g)) * (0.5 * length) ** (q + 1)
    return total


def trajectory_energy(tr: ShootingTrajectory) -> float:
    """I_p (or I_0 at p = 0) of a trajectory by quadrature in r."""
    d = tr.domain
    r = tr.r
    spl = tr.spline()
    lo, hi = r[:-1], r[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    kin = d.sigma * x ** (d.N - 1) * spl(x, 1) ** 2
    kin = float((kin.reshape(-1, _GL_X.size) @ _GL_W * half).sum())
    pot = _weighted_power_integral(tr, tr.p + 1, False) / (tr.p + 1)
    return 0.5 * kin - pot


def compatibility_defect(tr: ShootingTrajectory) -> tuple[float, float]:
    """(int |u|^(p-1) u, int |u|^p) by quadrature."""
    d = tr.domain
    if tr.p == 0:
        # two constant pieces split at the zero
        if tr.crossings == 1:
            r0 = tr.first_zero
            inner = float(d.shell(d.a, r0))
            outer = float(d.shell(r0, d.b))
            return float(np.sign(tr.u[0])) * (inner - outer), inner + outer
        return _weighted_power_integral(tr, 0.0, True), float(d.volume)
    return _weighted_power_integral(tr, tr.p, True), _weighted_power_integral(tr, tr.p, False)


def scan_miss(p: float, domain: RadialDomain, config: ShootingConfig | None = None):
    """Evaluate m(s) on the geometric scan. Returns a list per sign of trajectories."""
    cfg = config or ShootingConfig()
    amp = 1.0 if p == 0 else natural_amplitude(p, domain)
    mags = amp * np.geomspace(cfg.s_range[0], cfg.s_range[1], cfg.n_scan)
    out = {}
    for sg in cfg.signs:
        out[sg] = [integrate_radial(p, sg * x, domain, cfg.M_ode, cfg.overflow, cfg.event_tol) for x in mags]
    return out


def _single(tr: ShootingTrajectory) -> bool:
    return tr.crossings == 1 and not tr.blown and math.isfinite(tr.m)


def _roots_between(t0, t1, miss, integ, depth: int) -> list:
    """Roots of m between two scan points, restricted to one crossing.

    When the crossing counts of the ends differ and straddle 1, the
    one-crossing window may sit strictly inside; the interval is then
    resampled geometrically up to ``depth`` times.
    """
    if _single(t0) and _single(t1):
        if t0.m == 0:
            return [t0.s]
        if t0.m * t1.m < 0:
            lo, hi = sorted((t0.s, t1.s))
            return [brentq(miss, lo, hi, xtol=1e-15 * abs(hi), rtol=1e-15, maxiter=200)]
        return []
    c0 = t0.crossings if not t0.blown else math.inf
    c1 = t1.crossings if not t1.blown else math.inf
    if depth <= 0 or c0 == c1 or not (min(c0, c1) <= 1 <= max(c0, c1)):
        return []
    inner = np.geomspace(t0.s, t1.s, 10)[1:-1]
    pts = [t0] + [integ(x) for x in inner] + [t1]
    out = []
    for a, b in zip(pts, pts[1:]):
        out += _roots_between(a, b, miss, integ, depth - 1)
    return out


def shoot(p: float, domain: RadialDomain, config: ShootingConfig | None = None) -> SolutionRecord:
    """Least-energy single-crossing radial solution.

    Brackets of ``m(s)`` between consecutive single-crossing scan points
    are refined with Brent's method to ``|m| <= tol * max|u'|``. Among the
    roots the one with the smallest energy is returned; all are listed in
    ``candidates``.
    """
    if p == 1:
        raise ValueError("p = 1 is linear; use the eigen path")
    if p < 0:
        raise ValueError("p must be nonnegative")
    if domain.is_ball and p >= domain.critical_exponent:
        raise ValueError("p >= p_c on a ball: no radial solution expected, use ball_nonexistence_scan")
    cfg = config or ShootingConfig()
    scans = scan_miss(p, domain, cfg)

    def integ(s):
        return integrate_radial(p, s, domain, cfg.M_ode, cfg.overflow, cfg.event_tol)

    def miss(s):
        return integ(s).m

    roots = []
    for trs in scans.values():
        for t0, t1 in zip(trs, trs[1:]):
            roots += _roots_between(t0, t1, miss, integ, cfg.refine_depth)
    if not roots:
        raise ShootingError(f"no single-crossing bracket of m(s) for p={p} on {domain}")
    cands = []
    for s in roots:
        tr = integrate_radial(p, s, domain, cfg.M_ode, cfg.overflow, cfg.event_tol)
        if not _single(tr):
            continue
        cands.append((trajectory_energy(tr), s, tr))
    if not cands:
        raise ShootingError(f"roots found for p={p} but none stayed single-crossing")
    cands.sort(key=lambda c: c[0])
    energy, s, tr = cands[0]
    scale = tr.slope_scale
    residual = abs(tr.m) / scale
    comp, ref = compatibility_defect(tr)
    from .qualitative import check_monotone

    mono, _ = check_monotone(tr.u, 1e-10)
    flags = []
    if not mono:
        flags.append("not monotone")
    converged = residual <= max(cfg.tol * 10, 1e-8)
    if not converged:
        flags.append("terminal slope above tolerance")
    return SolutionRecord(
        p, domain, s, tr.m, tr, energy, residual, abs(comp) / ref, tr.crossings, tr.first_zero,
        bool(mono), converged, [{"s": c[1], "energy": c[0]} for c in cands], flags,
    )
