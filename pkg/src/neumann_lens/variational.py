"""Constrained minimization of the Dirichlet energy, its dual and the energies.

Direct level: minimize ``int |grad v|^2`` over ``||v||_{p+1} = 1`` and
``int |v|^(p-1) v = 0``. The descent direction is the K-preconditioned
gradient

    d = (v - mean v) - Lam * K(|v|^(p-1) v),     Lam = int |grad v|^2,

and every trial point ``v - t d`` is recentered with c_p and then
normalized. With ``t = 1`` the step is the dual fixed point
``v <- K_p(|v|^(p-1) v)``. Steps are Barzilai-Borwein with backtracking,
so the level never increases.

Dual level: maximize ``int f K f`` over ``int f = 0`` and
``||f||_{(p+1)/p} = 1``. The update ``f <- |K_p f|^(p-1) K_p f``
(normalized) maximizes the linearization of the convex objective on the
constraint set, hence is an ascent step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .eigen import radial_eigenpair
from .grid import RadialField, RadialGrid, integrate, lq_norm
from .nonlinear_average import odd_power, shift, weighted_median
from .operators import CompatibilityError, NeumannLaplacian, laplacian_for

log = logging.getLogger(__name__)

ZERO_FLOOR = 1e-14


@dataclass
class VariationalConfig:
    """Stopping rules shared by the direct and dual solvers.

    ``tol`` bounds the relative Euler-Lagrange residual
    ``||L v - Lam phi(v)||_2 / (Lam ||phi(v)||_2)``; ``level_tol`` stops
    the iteration once the level has stalled to that relative size while
    the residual is within ``stall_factor * tol``.
    """

    tol: float = 1e-7
    level_tol: float = 1e-14
    max_iter: int = 50_000
    stall_factor: float = 100.0
    max_backtracks: int = 60
    recenter_tol: float = 1e-10


@dataclass
class VariationalResult:
    p: float
    level: float
    extremizer: RadialField
    el_residual: float
    iterations: int
    converged: bool
    kind: str = "lambda"
    history: list = field(default_factory=list, repr=False)
    starts: list = field(default_factory=list)
    flags: list = field(default_factory=list)


@dataclass
class LevelRecord:
    p: float
    L_p: float
    Lambda_p: float
    D_p: float
    duality_defect: float
    relation_defect: float
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "L_p": self.L_p,
            "Lambda_p": self.Lambda_p,
            "D_p": self.D_p,
            "duality_defect": self.duality_defect,
            "relation_defect": self.relation_defect,
            "flags": list(self.flags),
        }


# -- energies ---------------------------------------------------------------

def energy_I(u: RadialField, p: float) -> float:
    """1/2 int |grad u|^2 - 1/(p+1) int |u|^(p+1).

    The gradient term is the edge-difference form ``u^T S u``, the same
    quadratic form the solvers minimize.
    """
    if p <= 0:
        raise ValueError("energy_I needs p > 0; use energy_I0 at p = 0")
    op = laplacian_for(u.grid)
    v = u.values
    return 0.5 * op.dirichlet(v) - float(np.dot(op.cell, np.abs(v) ** (p + 1))) / (p + 1)


def energy_I0(u: RadialField) -> float:
    """1/2 int |grad u|^2 - int |u|."""
    op = laplacian_for(u.grid)
    v = u.values
    return 0.5 * op.dirichlet(v) - float(np.dot(op.cell, np.abs(v)))


def dual_energy_phi(f: RadialField, p: float, tol: float = 1e-8) -> float:
    """p/(p+1) int |f|^((p+1)/p) - 1/2 int f K f."""
    if p <= 0:
        raise ValueError("p must be positive")
    op = laplacian_for(f.grid)
    v = f.values
    total = integrate(f.grid, v)
    l1 = lq_norm(f.grid, v, 1)
    if abs(total) > tol * max(l1, 1e-300):
        raise CompatibilityError(f"int f = {total:.3e} is not zero")
    q = (p + 1) / p
    return p / (p + 1) * float(np.dot(op.cell, np.abs(v) ** q)) - 0.5 * float(np.dot(op.cell, v * op.solve(v)))


def level_L(p: float, Lam: float) -> float:
    """(p-1)/(2(p+1)) * Lam^((p+1)/(p-1)); negative for p < 1."""
    if p <= 0:
        raise ValueError("p must be positive")
    if p == 1:
        raise ValueError("level_L is singular at p = 1")
    if Lam <= 0:
        raise ValueError("Lam must be positive")
    return (p - 1) / (2 * (p + 1)) * Lam ** ((p + 1) / (p - 1))


def scale_to_solution(v: RadialField, Lam: float, p: float) -> RadialField:
    """u = Lam^(1/(p-1)) v solves -Lap u = |u|^(p-1) u."""
    if p == 1:
        raise ValueError("no rescaling at p = 1")
    return v * Lam ** (1.0 / (p - 1))


def pde_residual(u: RadialField, p: float) -> float:
    """||-Lap u - |u|^(p-1) u||_2, excluding cells next to sign changes when p < 1."""
    op = laplacian_for(u.grid)
    v = u.values
    res = op.lap(v) - _force(v, p)
    mask = _residual_mask(v, p)
    return math.sqrt(float(np.dot(op.cell[mask], res[mask] ** 2)))


# -- gradients (also used by the finite-difference property tests) ----------

def dirichlet_gradient(grid: RadialGrid, v: np.ndarray) -> np.ndarray:
    """Nodal gradient of ``v -> int |grad v|^2``: ``2 S v``."""
    return 2.0 * laplacian_for(grid).stiffness(v)


def norm_power_gradient(grid: RadialGrid, v: np.ndarray, p: float) -> np.ndarray:
    """Nodal gradient of ``v -> int |v|^(p+1)``."""
    return (p + 1) * grid.cell * odd_power(v, p)


def balance_gradient(grid: RadialGrid, v: np.ndarray, p: float) -> np.ndarray:
    """Nodal gradient of ``v -> int |v|^(p-1) v`` (v without zeros)."""
    return p * grid.cell * np.abs(v) ** (p - 1)


# -- internals ----------------------------------------------------------------

def _force(v: np.ndarray, p: float) -> np.ndarray:
    """|v|^(p-1) v; for p < 1 values below ZERO_FLOOR * max|v| count as zeros.

    Recentering by bisection leaves a node that should vanish at roundoff
    size, where |v|^p is far from 0 when p is small.
    """
    out = odd_power(v, p)
    if p < 1:
        out[np.abs(v) <= ZERO_FLOOR * np.max(np.abs(v))] = 0.0
    return out


def _residual_mask(v: np.ndarray, p: float) -> np.ndarray:
    mask = np.ones(v.size, dtype=bool)
    if p < 1:
        flips = np.nonzero(np.sign(v[:-1]) != np.sign(v[1:]))[0]
        mask[flips] = False
        mask[flips + 1] = False
    return mask


def _wnorm(op: NeumannLaplacian, x: np.ndarray) -> float:
    return math.sqrt(float(np.dot(op.cell, x * x)))


def _el_residual(op: NeumannLaplacian, v: np.ndarray, lam: float, p: float) -> float:
    phi = _force(v, p)
    res = op.lap(v) - lam * phi
    mask = _residual_mask(v, p)
    den = lam * math.sqrt(float(np.dot(op.cell[mask], phi[mask] ** 2)))
    return math.sqrt(float(np.dot(op.cell[mask], res[mask] ** 2))) / max(den, 1e-300)


class _Direct:
    """State of one descent run for the direct level."""

    def __init__(self, op: NeumannLaplacian, p: float, cfg: VariationalConfig):
        self.op = op
        self.p = p
        self.q = p + 1
        self.cfg = cfg
        self.vol = float(op.cell.sum())

    def project(self, u: np.ndarray) -> np.ndarray:
        c = shift(self.op.grid, u, self.p, self.cfg.recenter_tol).c
        u = u + c
        return u / float(np.dot(self.op.cell, np.abs(u) ** self.q)) ** (1.0 / self.q)

    def direction(self, v: np.ndarray, lam: float) -> np.ndarray:
        mv = float(np.dot(self.op.cell, v)) / self.vol
        return (v - mv) - lam * self.op.solve(_force(v, self.p))

    def run(self, v0: np.ndarray):
        op, cfg = self.op, self.cfg
        v = self.project(v0)
        lam = op.dirichlet(v)
        d = self.direction(v, lam)
        history = [lam]
        t = 1.0
        converged = False
        it = 0
        res = _el_residual(op, v, lam, self.p)
        for it in range(1, cfg.max_iter + 1):
            step = t
            for _ in range(cfg.max_backtracks):
                trial = self.project(v - step * d)
                lam_t = op.dirichlet(trial)
                if lam_t <= lam:
                    break
                step *= 0.5
            else:
                # no decrease along d: stationary up to roundoff
                converged = res <= cfg.stall_factor * cfg.tol
                break
            d_t = self.direction(trial, lam_t)
            s = trial - v
            y = d_t - d
            sy = float(np.dot(op.cell, s * y))
            t = float(np.dot(op.cell, s * s)) / sy if sy > 0 else 1.0
            t = min(max(t, 1e-3), 1e3)
            drop = lam - lam_t
            v, lam, d = trial, lam_t, d_t
            history.append(lam)
            res = _el_residual(op, v, lam, self.p)
            if res <= cfg.tol:
                converged = True
                break
            if drop <= cfg.level_tol * lam and res <= cfg.stall_factor * cfg.tol:
                converged = True
                break
        return v, lam, res, it, converged, history


def _seed_fields(op: NeumannLaplacian, warm_start):
    psi = _first_mode(op)
    seeds = [("+psi1", psi), ("-psi1", -psi)]
    if warm_start is not None:
        w = warm_start.values if isinstance(warm_start, RadialField) else np.asarray(warm_start, float)
        if w.shape != psi.shape:
            raise ValueError("warm start does not match the grid")
        seeds.append(("warm", w))
    return seeds


_MODE_CACHE: dict = {}


def _first_mode(op: NeumannLaplacian) -> np.ndarray:
    key = id(op.grid)
    hit = _MODE_CACHE.get(key)
    if hit is not None and hit[0] is op.grid:
        return hit[1]
    psi = radial_eigenpair(op).psi.values
    if len(_MODE_CACHE) > 32:
        _MODE_CACHE.clear()
    _MODE_CACHE[key] = (op.grid, psi)
    return psi


def _ball_flags(grid: RadialGrid, p: float) -> list:
    d = grid.domain
    if d.is_ball and p >= d.critical_exponent:
        return ["radial representation unavailable"]
    return []


def minimize_lambda(p: float, grid: RadialGrid, config: VariationalConfig | None = None,
                    warm_start=None, seeds: list | None = None) -> VariationalResult:
    """Lam_p and a normalized minimizer by multi-start projected descent.

    Starts from ``+psi_1``, ``-psi_1`` and ``warm_start`` (if given), or
    from the named arrays in ``seeds``. Every start is logged in
    ``result.starts``; the lowest level wins.
    """
    if p <= 0:
        raise ValueError("minimize_lambda needs p > 0")
    cfg = config or VariationalConfig()
    op = laplacian_for(grid)
    runner = _Direct(op, p, cfg)
    starts = []
    best = None
    for name, v0 in (seeds if seeds is not None else _seed_fields(op, warm_start)):
        v, lam, res, it, ok, hist = runner.run(np.asarray(v0, dtype=float))
        starts.append({"seed": name, "level": lam, "el_residual": res, "iterations": it, "converged": ok})
        log.debug("p=%g seed=%s Lam=%.12g res=%.2e it=%d", p, name, lam, res, it)
        if best is None or lam < best[1] or (ok and not best[4] and lam <= best[1] * (1 + 1e-9)):
            best = (v, lam, res, it, ok, hist)
    v, lam, res, it, ok, hist = best
    if v[0] < 0:
        v = -v
    flags = _ball_flags(grid, p)
    if not ok:
        flags.append("not converged")
    return VariationalResult(p, lam, RadialField(grid, v), res, it, ok, "lambda", hist, starts, flags)


def maximize_D(p: float, grid: RadialGrid, config: VariationalConfig | None = None,
               start=None) -> VariationalResult:
    """D_p = max int f K f over zero-mean f with ||f||_{(p+1)/p} = 1.

    ``el_residual`` is the relative stationarity defect
    ``||K_p f - D |f|^(1/p-1) f||_2 / (D ||f|^(1/p-1) f||_2)``.
    """
    if p <= 0:
        raise ValueError("maximize_D needs p > 0")
    cfg = config or VariationalConfig()
    op = laplacian_for(grid)
    q = (p + 1) / p

    def normalize(f):
        f = f - float(np.dot(op.cell, f)) / float(op.cell.sum())
        return f / float(np.dot(op.cell, np.abs(f) ** q)) ** (1.0 / q)

    def k_p(f):
        w = op.solve(f)
        return w + shift(grid, w, p, cfg.recenter_tol).c

    if start is None:
        f = normalize(_first_mode(op))
    else:
        f = normalize(start.values if isinstance(start, RadialField) else np.asarray(start, float))
    val = float(np.dot(op.cell, f * op.solve(f)))
    history = [val]
    converged = False
    res = math.inf
    it = 0
    for it in range(1, cfg.max_iter + 1):
        w = k_p(f)
        f_new = normalize(odd_power(w, p))
        val_new = float(np.dot(op.cell, f_new * op.solve(f_new)))
        if val_new < val * (1 - 1e-13):
            log.warning("dual ascent lost %.3e at iteration %d", val - val_new, it)
        gain = val_new - val
        f, val = f_new, val_new
        history.append(val)
        res = _dual_residual(op, f, val, p, k_p)
        if res <= cfg.tol or (abs(gain) <= cfg.level_tol * val and res <= cfg.stall_factor * cfg.tol):
            converged = True
            break
    if f[0] < 0:
        f = -f
    flags = _ball_flags(grid, p)
    if not converged:
        flags.append("not converged")
    return VariationalResult(p, val, RadialField(grid, f), res, it, converged, "dual", history, [], flags)


def _dual_residual(op, f, D, p, k_p) -> float:
    g = odd_power(f, 1.0 / p)
    res = k_p(f) - D * g
    mask = _residual_mask(f, p)
    den = D * math.sqrt(float(np.dot(op.cell[mask], g[mask] ** 2)))
    return math.sqrt(float(np.dot(op.cell[mask], res[mask] ** 2))) / max(den, 1e-300)


def level_record(p: float, grid: RadialGrid, config: VariationalConfig | None = None,
                 warm_start=None, method: str = "both"):
    """Solve at ``p`` and collect the levels into a LevelRecord.

    Returns ``(record, u_p, direct, dual)``; ``direct`` or ``dual`` is
    None when the method excludes it.
    """
    if method not in ("direct", "dual", "both"):
        raise ValueError(f"unknown method {method!r}")
    direct = dual = None
    flags = []
    if method in ("direct", "both"):
        direct = minimize_lambda(p, grid, config, warm_start)
        flags += direct.flags
    if method in ("dual", "both"):
        dual = maximize_D(p, grid, config)
        flags += [f"dual: {x}" for x in dual.flags]
    if direct is not None:
        lam = direct.level
        v = direct.extremizer
    else:
        # the dual maximizer maps to a direct minimizer through v = |f|^(1/p-1) f
        lam = 1.0 / dual.level
        g = odd_power(dual.extremizer.values, 1.0 / p)
        g = g / lq_norm(grid, g, p + 1)
        v = RadialField(grid, g)
    D = dual.level if dual is not None else 1.0 / lam
    if p == 1:
        # linear case: the level is undefined and v itself is returned
        flags.append("p = 1: no level, profile is the normalized extremizer")
        rec = LevelRecord(p, math.nan, lam, D, abs(lam * D - 1.0), math.nan, flags)
        return rec, v, direct, dual
    u = scale_to_solution(v, lam, p)
    L = level_L(p, lam)
    rel = abs(energy_I(u, p) - L) / abs(L)
    rec = LevelRecord(p, L, lam, D, abs(lam * D - 1.0), rel, flags)
    return rec, u, direct, dual


# -- p = 0 --------------------------------------------------------------------

@dataclass
class L0Result:
    level: float
    u: RadialField
    method: str
    iterations: int
    converged: bool
    candidates: dict = field(default_factory=dict)


def _balanced_sign(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    """sgn(u - m) with m the weighted median; the median cell is split."""
    m, k, frac = weighted_median(grid, u)
    s = np.where(u > m, 1.0, np.where(u < m, -1.0, 0.0))
    s[k] = 2.0 * frac - 1.0
    return s


def _to_balance(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    # the median shift maximizes I_0 along constants, which lands in M_0
    return u - weighted_median(grid, u)[0]


def _descend_L0(grid: RadialGrid, u0: np.ndarray, max_iter: int, tol: float):
    op = laplacian_for(grid)

    def i0(u):
        return 0.5 * op.dirichlet(u) - float(np.dot(op.cell, np.abs(u)))

    u = _to_balance(grid, u0)
    val = i0(u)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        # preconditioned subgradient: u - K(Lu - s) = mean(u) + K s
        target = op.solve(_balanced_sign(grid, u))
        d = u - target
        step = 1.0
        for _ in range(40):
            trial = _to_balance(grid, u - step * d)
            val_t = i0(trial)
            if val_t <= val:
                break
            step *= 0.5
        else:
            converged = _wnorm(op, d - float(np.dot(op.cell, d)) / float(op.cell.sum())) <= math.sqrt(tol) * _wnorm(op, u)
            break
        change = _wnorm(op, trial - u)
        u, val = trial, val_t
        if change <= tol * _wnorm(op, u):
            converged = True
            break
    return u, val, it, converged


def minimize_L0(grid: RadialGrid, config: VariationalConfig | None = None, method: str = "both",
                continuation=(0.1, 0.01, 0.001)) -> L0Result:
    """L_0 = min I_0 over the balance set, and a minimizer.

    ``method="descent"`` runs preconditioned subgradient descent on I_0
    with a median shift after each step; ``"continuation"`` solves the
    direct problem along ``continuation``, rescales, extrapolates linearly
    to p = 0 and moves the result into the balance set. ``"both"`` keeps
    the lower I_0.
    """
    if method not in ("descent", "continuation", "both"):
        raise ValueError(f"unknown method {method!r}")
    cfg = config or VariationalConfig()
    op = laplacian_for(grid)
    cands = {}
    if method in ("descent", "both"):
        psi = _first_mode(op)
        u, val, it, ok = _descend_L0(grid, psi, cfg.max_iter, 1e-13)
        cands["descent"] = (u, val, it, ok)
    if method in ("continuation", "both"):
        ps = sorted(continuation, reverse=True)
        prof = []
        warm = None
        its = 0
        ok = True
        for p in ps:
            r = minimize_lambda(p, grid, cfg, warm_start=warm)
            warm = r.extremizer
            its += r.iterations
            ok = ok and r.converged
            prof.append(scale_to_solution(r.extremizer, r.level, p).values)
        if len(ps) >= 2:
            p1, p2 = ps[-2], ps[-1]
            u = prof[-1] - p2 * (prof[-2] - prof[-1]) / (p1 - p2)
        else:
            u = prof[-1]
        u = _to_balance(grid, u)
        cands["continuation"] = (u, float(energy_I0(RadialField(grid, u))), its, ok)
    name = min(cands, key=lambda k: cands[k][1])
    u, val, it, ok = cands[name]
    if u[0] > 0:
        u = -u
    summary = {k: {"I0": v[1], "iterations": v[2], "converged": v[3]} for k, v in cands.items()}
    return L0Result(val, RadialField(grid, u), name, it, ok, summary)
