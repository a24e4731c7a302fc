"""Qualitative checks on radial solutions.

Monotonicity, the first integral of the critical radial equation,
shooting evidence on balls at and above the critical power, and the
flip-and-rearrange map on zero-mean fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from . import _kernels
from .grid import RadialDomain, RadialField, integrate, lq_norm
from .operators import laplacian_for


def check_monotone(u, tol: float = 1e-10) -> tuple[bool, float]:
    """Whether consecutive differences share one sign up to ``tol * max|u|``.

    Returns ``(monotone, worst)`` where ``worst`` is the largest step
    against the overall trend, relative to ``max|u|``.
    """
    v = u.values if isinstance(u, RadialField) else np.asarray(u, dtype=float)
    scale = float(np.max(np.abs(v)))
    if scale == 0 or v.size < 2:
        return True, 0.0
    dv = np.diff(v)
    trend = np.sign(v[-1] - v[0]) or 1.0
    worst = float(max(np.max(-trend * dv), 0.0)) / scale
    return worst <= tol, worst


# -- first integral at the critical power -------------------------------------

@dataclass
class PohozaevProfile:
    r: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    max_deviation: float
    relative_deviation: float


def _radial_data(u, du=None):
    """(r, u, u', domain) from a trajectory or a grid field."""
    if isinstance(u, RadialField):
        r = u.grid.r
        v = u.values
        if du is None:
            du = np.gradient(v, r, edge_order=2)
        return np.asarray(r), v, np.asarray(du, dtype=float), u.grid.domain
    # ShootingTrajectory or SolutionRecord
    tr = getattr(u, "trajectory", u)
    return tr.r, tr.u, tr.du, tr.domain


def pohozaev_profile(u, du=None) -> PohozaevProfile:
    """P(r) = r^N/(2N) u'^2 + (N-2)/(2N) r^(N-1) u' u + (N-2)/(2N^2) r^N |u|^(2N/(N-2)).

    ``u`` is a RadialField (``u'`` by centered differences unless given)
    or a shooting trajectory, which carries its own ``u'``. P is constant
    along radial solutions at ``p = (N+2)/(N-2)``.
    """
    r, v, dv, d = _radial_data(u, du)
    N = d.N
    if N < 3:
        raise ValueError("the first integral needs N >= 3")
    e = 2.0 * N / (N - 2)
    P = (r**N / (2 * N) * dv**2 + (N - 2) / (2 * N) * r ** (N - 1) * dv * v
         + (N - 2) / (2 * N**2) * r**N * np.abs(v) ** e)
    dev = float(np.max(np.abs(P - P[0])))
    ref = abs(P[0]) if P[0] != 0 else float(np.max(np.abs(P)))
    return PohozaevProfile(r, P, dev, dev / ref if ref > 0 else 0.0)


@dataclass(frozen=True)
class EndpointIdentity:
    inner: float
    at_zero: float
    r0: float
    relative_defect: float


def pohozaev_endpoint(u, du=None) -> EndpointIdentity:
    """Compare (N-2)/(2N^2) a^N |u(a)|^(2N/(N-2)) with r0^N/(2N) u'(r0)^2.

    ``r0`` is the first zero, located on the cubic Hermite interpolant.
    """
    r, v, dv, d = _radial_data(u, du)
    N = d.N
    if N < 3:
        raise ValueError("the first integral needs N >= 3")
    sg = np.sign(v)
    k = np.nonzero(sg[:-1] * sg[1:] < 0)[0]
    if k.size == 0:
        raise ValueError("u has no sign change")
    k = int(k[0])
    spl = CubicHermiteSpline(r[k:k + 2], v[k:k + 2], dv[k:k + 2])
    r0 = float(brentq(spl, r[k], r[k + 1], xtol=1e-15 * max(1.0, r[-1])))
    slope = float(spl(r0, 1))
    inner = (N - 2) / (2 * N**2) * d.a**N * abs(v[0]) ** (2.0 * N / (N - 2))
    at_zero = r0**N / (2 * N) * slope**2
    return EndpointIdentity(inner, at_zero, r0, abs(inner - at_zero) / max(abs(at_zero), 1e-300))


# -- ball evidence --------------------------------------------------------------

@dataclass
class NonexistenceReport:
    p: float
    N: int
    radius: float
    s_range: tuple
    n_samples: int
    crossing_counts: dict
    min_abs_m: float
    min_abs_m_relative: float
    min_abs_m_single: float | None
    m_sign_definite: bool
    roots: list
    pohozaev_at_zero: float | None
    verdict: str
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["s_range"] = list(self.s_range)
        out["crossing_counts"] = {str(k): v for k, v in self.crossing_counts.items()}
        return out


@dataclass
class BallScanConfig:
    s_range: tuple = (1e-2, 1e3)
    n_scan: int = 400
    step: float = 1e-3
    overflow: float = 1e100


def _unit_trajectory(p: float, N: int, rho_max: float, h0: float, overflow: float = 1e100):
    """U with U(0) = 1, U'(0) = 0 on [0, rho_max].

    The step is ``h0`` on [0, 8] and doubles each time rho doubles, which
    keeps the number of steps per unit of log(rho) fixed.
    """
    c2 = -1.0 / (2 * N)
    c4 = p / (8 * N * (N + 2))
    Rs = [np.array([0.0, h0])]
    Us = [np.array([1.0, 1 + c2 * h0**2 + c4 * h0**4])]
    Vs = [np.array([0.0, 2 * c2 * h0 + 4 * c4 * h0**3])]
    r, h, end = h0, h0, 8.0
    blown = False
    while r < rho_max and not blown:
        stop = min(end, rho_max)
        n = max(int(math.ceil((stop - r) / h)), 1)
        hh = (stop - r) / n
        u, v, n_valid, blown = _kernels.rk4_radial(r, hh, n, Us[-1][-1], Vs[-1][-1], float(p), int(N), overflow, 1e-12)
        Rs.append(r + hh * np.arange(1, n_valid))
        Us.append(u[1:n_valid])
        Vs.append(v[1:n_valid])
        r, h, end = stop, 2 * h, 2 * end
    return np.concatenate(Rs), np.concatenate(Us), np.concatenate(Vs), bool(blown)


def ball_nonexistence_scan(p: float, N: int, radius: float = 1.0,
                           config: BallScanConfig | None = None) -> NonexistenceReport:
    """Shooting evidence for or against a Neumann closure on a ball.

    Uses scaling: with ``U`` the solution for ``U(0) = 1`` and
    ``k = s^((p-1)/2)``, the trajectory from ``s > 0`` is ``s U(k r)``, so
    ``m(s) = s k U'(k R)``. One fine trajectory of ``U`` on ``[0, k_max R]``
    therefore covers the whole scan; ``s < 0`` follows by oddness. The
    report never claims a proof, only what the scan found.
    """
    if N < 3:
        raise ValueError("the scan is meant for N >= 3")
    if p <= 1:
        raise ValueError("the scan is meant for superlinear p")
    cfg = config or BallScanConfig()
    s = np.geomspace(cfg.s_range[0], cfg.s_range[1], cfg.n_scan)
    k = s ** ((p - 1) / 2)
    rho = k * radius
    rho_max = float(rho[-1]) * (1 + 1e-9)
    R, U, V, blown = _unit_trajectory(p, N, rho_max, cfg.step)
    notes = []
    if blown:
        notes.append(f"reference trajectory overflowed at rho={R[-1]:.4g}")
    spl = CubicHermiteSpline(R, U, V)
    ok = rho <= R[-1]
    s, k, rho = s[ok], k[ok], rho[ok]
    m = s * k * spl(rho, 1)
    slope_scale = np.array([s_i * k_i * np.max(np.abs(V[: int(np.searchsorted(R, r_i)) + 1]))
                            for s_i, k_i, r_i in zip(s, k, rho)])
    # zeros of U and crossing counts up to each rho
    sg = np.sign(U)
    zk = np.nonzero(sg[:-1] * sg[1:] < 0)[0]
    zeros = np.array([brentq(lambda x, j=j: spl(x), R[j], R[j + 1]) for j in zk])
    counts = np.searchsorted(zeros, rho) if zeros.size else np.zeros(rho.size, dtype=int)
    hist = {int(c): int(np.sum(counts == c)) for c in np.unique(counts)}
    single = counts == 1
    roots = []
    for i in range(m.size - 1):
        if m[i] * m[i + 1] < 0:
            def miss(x):
                return x * x ** ((p - 1) / 2) * float(spl(x ** ((p - 1) / 2) * radius, 1))
            root = brentq(miss, s[i], s[i + 1], xtol=1e-14 * s[i + 1])
            kk = root ** ((p - 1) / 2) * radius
            roots.append({"s": float(root), "crossings": int(np.searchsorted(zeros, kk)) if zeros.size else 0})
    poh = None
    if zeros.size:
        rho0 = zeros[0]
        # invariant under the scaling exactly when p is critical
        poh = float(rho0**N / (2 * N) * float(spl(rho0, 1)) ** 2)
    absm = np.abs(m)
    single_roots = [rt for rt in roots if rt["crossings"] == 1]
    if single_roots:
        verdict = f"Neumann closure found at s={single_roots[0]['s']:.6g}"
    elif roots:
        verdict = "only multi-crossing closures found"
    else:
        verdict = "no Neumann closure found"
    return NonexistenceReport(
        p=float(p), N=int(N), radius=float(radius), s_range=(float(s[0]), float(s[-1])),
        n_samples=int(s.size), crossing_counts=hist,
        min_abs_m=float(absm.min()), min_abs_m_relative=float(np.min(absm / slope_scale)),
        min_abs_m_single=float(absm[single].min()) if np.any(single) else None,
        m_sign_definite=bool(np.all(m < 0) or np.all(m > 0)),
        roots=roots, pohozaev_at_zero=poh, verdict=verdict, notes=notes,
    )


# -- flip and rearrange -------------------------------------------------------

@dataclass
class RearrangementResult:
    f: RadialField
    out: RadialField
    piece_values: np.ndarray = field(repr=False)
    piece_measures: np.ndarray = field(repr=False)
    q_in: float
    q_out: float
    norm_defect: float
    mean_out: float
    q: float = 2.0
    projection_loss: float = 0.0

    @property
    def gain(self) -> float:
        return self.q_out - self.q_in


def cumulative_flux(f: RadialField) -> np.ndarray:
    """int of f from a to each interior cell boundary (length M)."""
    return np.cumsum(f.grid.cell * f.values)[:-1]


def dual_form(f: RadialField) -> float:
    """int f K f, evaluated as sum over edges of flux^2 / conductance."""
    op = laplacian_for(f.grid)
    flux = cumulative_flux(f)
    return float(np.sum(flux**2 / op.edge))


def _flip_pieces(cell: np.ndarray, f: np.ndarray):
    """Pieces (value, measure) of sgn(I) f with cells split where I changes sign.

    Pieces stay in cell order; a cell contributes two pieces only when the
    cumulative integral I changes sign inside it (I is linear there).
    """
    I = np.concatenate(([0.0], np.cumsum(cell * f)))
    I[-1] = 0.0  # zero mean, up to roundoff
    left, right = I[:-1], I[1:]
    lp, rp = left > 0, right > 0
    theta = np.ones_like(f)
    mixed = lp != rp
    theta[mixed] = left[mixed] / (left[mixed] - right[mixed])
    first = np.where(lp, f, -f)
    second = np.where(rp, f, -f)
    vals = np.column_stack((first, second)).ravel()
    meas = np.column_stack((theta * cell, (1 - theta) * cell)).ravel()
    keep = meas > 0
    return vals[keep], meas[keep]


def _project_steps(cell: np.ndarray, values: np.ndarray, measures: np.ndarray) -> np.ndarray:
    """Cell averages of the step function laid out in decreasing order."""
    order = np.argsort(-values, kind="stable")
    v, w = values[order], measures[order]
    ends = np.concatenate(([0.0], np.cumsum(w)))
    edges = np.concatenate(([0.0], np.cumsum(cell)))
    edges[-1] = ends[-1] = max(edges[-1], ends[-1])
    # antiderivative of the step function at the cell edges
    F = np.concatenate(([0.0], np.cumsum(v * w)))
    j = np.clip(np.searchsorted(ends, edges, side="right") - 1, 0, v.size - 1)
    G = F[j] + v[j] * (edges - ends[j])
    avg = np.diff(G) / cell
    # a cell inside one piece takes its value exactly
    same = j[:-1] == j[1:]
    avg[same] = v[j[:-1][same]]
    # cancellation in the cumulative sums can leave 1e-16-size upticks
    return np.minimum.accumulate(avg)


def flip_rearrange(f: RadialField, q: float = 2.0, tol: float = 1e-8) -> RearrangementResult:
    """Flip by the sign of the cumulative integral, then rearrange decreasingly.

    The field is read as constant on each dual cell. Cells in which the
    cumulative integral changes sign are split at its zero, the pieces are
    sorted by value and laid out from the inner boundary in the volume
    coordinate. That step function has the distribution of ``f``; its cell
    averages lose a little ``L^q`` norm when pieces straddle cells of
    different volume, so the grid output is rescaled to ``||f||_q``
    (``projection_loss`` records the factor). Averaging keeps the
    cumulative integrals at cell boundaries and the rescaling factor is at
    least one, so ``q_out >= q_in`` holds up to roundoff.
    """
    grid = f.grid
    cell = grid.cell
    v = f.values
    total = integrate(grid, v)
    if abs(total) > tol * max(lq_norm(grid, v, 1), 1e-300):
        raise ValueError(f"f must have zero mean (int f = {total:.3e})")
    vals, meas = _flip_pieces(cell, v)
    avg = _project_steps(cell, vals, meas)
    norm_in = lq_norm(grid, v, q)
    norm_avg = lq_norm(grid, avg, q)
    factor = norm_in / norm_avg if norm_avg > 0 else 1.0
    out = RadialField(grid, avg * factor)
    defect = abs(lq_norm(grid, out.values, q) - norm_in) / max(norm_in, 1e-300)
    return RearrangementResult(
        f, out, vals, meas, dual_form(f), dual_form(out), defect, integrate(grid, out.values), q,
        1.0 - 1.0 / factor,
    )
