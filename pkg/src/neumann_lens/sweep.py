"""Continuation in p with limit diagnostics and the nine-panel profile figure.

Each p is routed to the solver that applies there: the direct/dual
variational pair for ``0 < p <= p_c``, shooting at ``p = 0`` and above
``p_c`` on annuli, and the eigenfunction limit at ``p = 1``. Profiles are
reported on a common grid with the sign convention ``u(a) < 0``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigen import log_normalization_constant, radial_eigenpair
from .grid import RadialDomain, RadialField, build_grid, write_field_csv
from .operators import laplacian_for
from .qualitative import check_monotone
from .shooting import ShootingConfig, ShootingError, shoot
from .variational import (
    VariationalConfig,
    energy_I0,
    level_L,
    maximize_D,
    minimize_L0,
    minimize_lambda,
    scale_to_solution,
)

log = logging.getLogger(__name__)

FIGURE1_P = (0.0, 0.5, 1.0, 1.5, 3.0, 6.0, 11.0, 31.0, 61.0)
MU_WINDOW = 1e-2


class LimitError(ValueError):
    pass


@dataclass
class SweepConfig:
    M: int = 2000
    variational: VariationalConfig = field(default_factory=VariationalConfig)
    shooting: ShootingConfig = field(default_factory=ShootingConfig)
    dual: bool = True
    warm_start: bool = True
    disagreement_tol: float = 1e-3


@dataclass
class SweepEntry:
    p: float
    method: str
    converged: bool
    u: RadialField | None = field(default=None, repr=False)
    L_p: float = math.nan
    Lambda_p: float = math.nan
    D_p: float = math.nan
    sup_norm: float = math.nan
    residual: float = math.nan
    monotone: bool = False
    sign_changing: bool = False
    seconds: float = 0.0
    flags: list = field(default_factory=list)
    error: str | None = None

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "u"}
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in out.items()}


@dataclass
class SweepReport:
    domain: RadialDomain
    M: int
    p_values: list
    entries: dict
    mu: float
    kappa: float
    diagnostics: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def all_converged(self) -> bool:
        return all(e.converged for e in self.entries.values())

    def to_dict(self) -> dict:
        d = self.domain
        return {
            "domain": {"N": d.N, "a": d.a, "b": d.b, "sigma0": d.sigma0},
            "M": self.M,
            "p_values": self.p_values,
            "mu_1_rad": self.mu,
            "kappa": self.kappa,
            "all_converged": self.all_converged,
            "entries": [self.entries[p].to_dict() for p in self.p_values],
            "diagnostics": _jsonable(self.diagnostics),
            "seconds": self.seconds,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def limit_u1(domain: RadialDomain, M: int = 2000, grid=None) -> RadialField:
    """kappa * psi_1, the limit profile of u_p as p -> 1 when mu_1,rad = 1.

    ``psi_1`` is L^2-normalized with ``psi_1(a) > 0``.
    """
    grid = grid or build_grid(domain, M)
    ep = radial_eigenpair(laplacian_for(grid))
    if abs(ep.mu - 1.0) > MU_WINDOW:
        raise LimitError(f"mu_1,rad = {ep.mu:.6g} is not within {MU_WINDOW} of 1")
    return ep.psi * log_normalization_constant(ep.psi)


def _align(u: RadialField) -> RadialField:
    return -u if u.values[0] > 0 else u


def _finish(entry: SweepEntry, u: RadialField) -> SweepEntry:
    u = _align(u)
    entry.u = u
    entry.sup_norm = u.sup()
    entry.monotone = check_monotone(u, 1e-10)[0]
    entry.sign_changing = bool(np.any(u.values > 0) and np.any(u.values < 0))
    return entry


def _solve_variational(p, grid, cfg: SweepConfig, warm):
    entry = SweepEntry(p, "variational", False)
    res = minimize_lambda(p, grid, cfg.variational, warm_start=warm)
    entry.Lambda_p = res.level
    entry.residual = res.el_residual
    entry.flags += res.flags
    cold = [s["level"] for s in res.starts if s["seed"] != "warm"]
    warm_lv = [s["level"] for s in res.starts if s["seed"] == "warm"]
    if cold and warm_lv and abs(min(cold) - warm_lv[0]) > cfg.disagreement_tol * min(cold):
        log.warning("p=%g: warm and cold starts disagree (%.6g vs %.6g)", p, warm_lv[0], min(cold))
        entry.flags.append("warm/cold disagreement")
    ok = res.converged
    if cfg.dual:
        dual = maximize_D(p, grid, cfg.variational)
        entry.D_p = dual.level
        ok = ok and dual.converged
        if abs(res.level * dual.level - 1) > 1e-3:
            entry.flags.append("duality defect above 1e-3")
    else:
        entry.D_p = 1.0 / res.level
    entry.L_p = level_L(p, res.level)
    entry.converged = ok
    u = scale_to_solution(res.extremizer, res.level, p)
    return _finish(entry, u), res.extremizer


def _solve_shooting(p, grid, cfg: SweepConfig):
    entry = SweepEntry(p, "shooting", False)
    rec = shoot(p, grid.domain, cfg.shooting)
    u = rec.trajectory.to_field(grid)
    entry.L_p = rec.energy
    entry.residual = rec.residual
    entry.flags += rec.flags
    entry.converged = rec.converged
    if p > 0:
        op = laplacian_for(grid)
        lam = op.dirichlet(u.values) / float(np.dot(grid.cell, np.abs(u.values) ** (p + 1))) ** (2 / (p + 1))
        entry.Lambda_p = lam
    return _finish(entry, u)


def _solve_eigen(grid, cfg: SweepConfig):
    entry = SweepEntry(1.0, "eigen", False)
    ep = radial_eigenpair(laplacian_for(grid))
    entry.Lambda_p = ep.mu
    entry.D_p = 1.0 / ep.mu
    entry.residual = ep.residual
    if abs(ep.mu - 1.0) > MU_WINDOW:
        entry.error = f"mu_1,rad = {ep.mu:.6g}: no solution at p = 1 unless mu = 1"
        entry.flags.append("p = 1 reported through trend tables")
        return entry
    u = ep.psi * log_normalization_constant(ep.psi)
    entry.L_p = 0.0
    entry.converged = True
    return _finish(entry, u)


def _solve_order(ps):
    up = sorted(p for p in ps if p >= 0.5)
    down = sorted((p for p in ps if p < 0.5), reverse=True)
    return up + down


def sweep(p_list, domain: RadialDomain, config: SweepConfig | None = None) -> SweepReport:
    """Solve at every p in ``p_list`` and collect profiles, levels and diagnostics."""
    cfg = config or SweepConfig()
    ps = sorted({float(p) for p in p_list})
    if any(p < 0 or not math.isfinite(p) for p in ps):
        raise ValueError("p values must be finite and nonnegative")
    t_start = time.perf_counter()
    grid = build_grid(domain, cfg.M)
    ep = radial_eigenpair(laplacian_for(grid))
    kappa = log_normalization_constant(ep.psi)
    pc = domain.critical_exponent
    entries = {}
    solved = {}
    for p in _solve_order(ps):
        t0 = time.perf_counter()
        try:
            if p == 1.0:
                entry = _solve_eigen(grid, cfg)
            elif p == 0.0 or p > pc:
                if domain.is_ball and p >= pc:
                    raise ShootingError("no radial solution expected on a ball for p >= p_c")
                entry = _solve_shooting(p, grid, cfg)
            else:
                warm = None
                if cfg.warm_start and solved:
                    warm = solved[min(solved, key=lambda q: abs(q - p))]
                entry, v = _solve_variational(p, grid, cfg, warm)
                solved[p] = v
                if domain.is_ball and p >= pc:
                    entry.flags.append("radial representation unavailable")
        except (ShootingError, ArithmeticError, ValueError) as exc:
            log.warning("p=%g failed: %s", p, exc)
            entry = SweepEntry(p, "failed", False, error=str(exc))
        entry.seconds = time.perf_counter() - t0
        entries[p] = entry
    report = SweepReport(domain, cfg.M, ps, entries, ep.mu, kappa)
    report.diagnostics = _diagnostics(report, grid, ep)
    report.seconds = time.perf_counter() - t_start
    return report


def _diagnostics(rep: SweepReport, grid, ep) -> dict:
    out = {}
    good = {p: e for p, e in rep.entries.items() if e.u is not None}
    small = [p for p in good if 0 < p <= 0.05]
    if small:
        u0 = minimize_L0(grid, method="descent").u
        out["p_to_0"] = {
            "L_0": energy_I0(u0),
            "sup_distance": {p: float(np.max(np.abs(good[p].u.values - u0.values))) for p in small},
        }
    near1 = [p for p in good if 0 < abs(p - 1) <= 0.05]
    if abs(rep.mu - 1) <= MU_WINDOW:
        if near1:
            lim = _align(ep.psi * rep.kappa)
            scale = lim.sup()
            out["p_to_1"] = {
                "kappa": rep.kappa,
                "relative_sup_distance": {p: float(np.max(np.abs(good[p].u.values - lim.values)) / scale) for p in near1},
            }
    else:
        below = sorted(p for p in good if p < 1)
        above = sorted(p for p in good if p > 1)

        def table(seq):
            return [{"p": p, "sup_norm": good[p].sup_norm, "L_p": good[p].L_p} for p in seq]

        # approaching 1 from each side
        lt, gt = table(below), table(list(reversed(above)))
        out["trend_near_1"] = {
            "below": lt,
            "above": gt,
            "sup_decreasing_below": _strict(x["sup_norm"] for x in lt) == "decreasing",
            "sup_increasing_toward_1_above": _strict(x["sup_norm"] for x in gt) == "increasing",
            # L_p < 0 below 1, so its size is what shrinks
            "abs_L_decreasing_below": _strict(abs(x["L_p"]) for x in lt) == "decreasing",
            "L_increasing_toward_1_above": _strict(x["L_p"] for x in gt) == "increasing",
        }
    pc = rep.domain.critical_exponent
    out["lambda_trace"] = [{"p": p, "Lambda_p": good[p].Lambda_p} for p in sorted(good) if 0 < p <= pc]
    return out


def _strict(values) -> str:
    v = list(values)
    if len(v) < 2:
        return "n/a"
    d = np.diff(v)
    if np.all(d > 0):
        return "increasing"
    if np.all(d < 0):
        return "decreasing"
    return "mixed"


# -- outputs -----------------------------------------------------------------

def _p_label(p: float) -> str:
    return f"{p:g}"


def write_outputs(report: SweepReport, out_dir, figure: bool = False) -> Path:
    """levels.csv, profile_p=<p>.csv per solved p, report.json and optionally figure1.svg."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "levels.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "L_p", "Lambda_p", "D_p", "sup_norm", "residual", "monotone"])
        for p in report.p_values:
            e = report.entries[p]
            w.writerow([repr(p), repr(e.L_p), repr(e.Lambda_p), repr(e.D_p), repr(e.sup_norm), repr(e.residual), int(e.monotone)])
    for p in report.p_values:
        e = report.entries[p]
        if e.u is not None:
            write_field_csv(out / f"profile_p={_p_label(p)}.csv", e.u, "u")
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2))
    if figure:
        plot_profiles(report, out / "figure1.svg")
    return out


def plot_profiles(report: SweepReport, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ps = [p for p in report.p_values if report.entries[p].u is not None]
    n = len(ps)
    cols = 3 if n > 4 else max(n, 1)
    rows = max(math.ceil(n / cols), 1)
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 2.6 * rows), squeeze=False)
    for ax, p in zip(axes.ravel(), ps):
        u = report.entries[p].u
        ax.plot(u.grid.r, u.values, lw=1.2)
        ax.axhline(0.0, color="0.6", lw=0.6)
        ax.set_title(f"p = {_p_label(p)}", fontsize=9)
        ax.tick_params(labelsize=7)
    for ax in axes.ravel()[n:]:
        ax.set_visible(False)
    d = report.domain
    fig.suptitle(f"radial profiles, N={d.N}, {d.a:g} < r < {d.b:g}", fontsize=10)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
