"""First nonconstant radial Neumann eigenpair and the annulus tuner."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import RadialDomain, RadialField, build_grid
from .operators import NeumannLaplacian

log = logging.getLogger(__name__)


class EigenError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenPair:
    mu: float
    psi: RadialField
    residual: float
    iterations: int


def _normalize(op: NeumannLaplacian, v: np.ndarray) -> np.ndarray:
    return v / math.sqrt(float(np.dot(op.cell, v * v)))


def _residual(op: NeumannLaplacian, v: np.ndarray, mu: float) -> float:
    res = op.lap(v) - mu * v
    return math.sqrt(float(np.dot(op.cell, res * res)))


def radial_eigenpair(op: NeumannLaplacian, tol: float = 1e-12, max_iter: int = 2000,
                     residual_tol: float = 1e-8) -> EigenPair:
    """Smallest nonzero eigenvalue by inverse iteration with K.

    K only sees the zero-average part of its argument, so constants are
    deflated at every step. Iteration stops once the relative change of
    ``mu`` is below ``tol`` and ``||L psi - mu psi||_2 <= residual_tol * mu``,
    or once the residual stops decreasing (it has reached rounding level).
    The eigenfunction is L^2-normalized, has zero average and satisfies
    ``psi(a) > 0``.
    """
    grid = op.grid
    d = grid.domain
    x = (grid.r - d.a) / (d.b - d.a)
    v = op.solve(np.cos(math.pi * x))
    v = _normalize(op, v)
    mu_old = res_old = math.inf
    for it in range(1, max_iter + 1):
        w = _normalize(op, op.solve(v))
        mu = op.dirichlet(w)
        step = min(float(np.sqrt(np.dot(op.cell, (w - v) ** 2))),
                   float(np.sqrt(np.dot(op.cell, (w + v) ** 2))))
        v = w
        if abs(mu - mu_old) <= tol * mu and step <= math.sqrt(tol):
            res = _residual(op, v, mu)
            if res <= residual_tol * mu or res >= 0.9 * res_old:
                break
            res_old = res
        mu_old = mu
    else:
        raise EigenError(f"inverse iteration did not converge in {max_iter} steps")
    if v[0] < 0:
        v = -v
    return EigenPair(mu, RadialField(grid, v), _residual(op, v, mu), it)


def eigenpair(domain: RadialDomain, M: int, tol: float = 1e-12) -> EigenPair:
    return radial_eigenpair(NeumannLaplacian(build_grid(domain, M)), tol)


@dataclass
class TuneResult:
    b: float
    mu: float
    history: list = field(default_factory=list)
    monotone: bool = True


def tune_annulus(N: int, a: float, target: float, tol: float = 1e-10, M: int = 4000,
                 sigma0: float = 1.0, max_iter: int = 100) -> TuneResult:
    """Outer radius ``b`` with ``mu_1,rad(a, b) = target``.

    Bracket search over ``b`` followed by safeguarded secant (Illinois)
    steps. Every evaluated ``(b, mu)`` is recorded, and the decrease of
    ``mu`` in ``b`` is checked on the recorded points rather than assumed.
    """
    if target <= 0:
        raise ValueError("target eigenvalue must be positive")
    if a < 0:
        raise ValueError("inner radius must be nonnegative")
    history = []

    def mu_of(b):
        mu = eigenpair(RadialDomain(a, b, N, sigma0), M, tol=1e-13).mu
        history.append((b, mu))
        return mu - target

    lo_b, hi_b = (a * 1.01, a * 1e3) if a > 0 else (1e-3, 1e3)
    f_lo = mu_of(lo_b)
    if f_lo < 0:
        raise EigenError(f"mu({lo_b:g}) already below target; no bracket in [{lo_b:g}, {hi_b:g}]")
    # geometric expansion until the sign flips
    b_prev, f_prev = lo_b, f_lo
    b = lo_b
    while True:
        b = min(b * 1.5 if a == 0 else a + (b - a) * 1.5, hi_b)
        f = mu_of(b)
        if f <= 0:
            break
        b_prev, f_prev = b, f
        if b >= hi_b:
            raise EigenError(f"no bracket for target {target} in [{lo_b:g}, {hi_b:g}]")
    x0, f0, x1, f1 = b_prev, f_prev, b, f
    side = 0
    for _ in range(max_iter):
        x = x1 - f1 * (x1 - x0) / (f1 - f0)
        fx = mu_of(x)
        if abs(fx) <= tol * target or abs(x1 - x0) <= 1e-15 * x:
            x1, f1 = x, fx
            break
        if fx * f1 < 0:
            x0, f0 = x1, f1
            side = 0
        else:
            if side == 1:
                f0 *= 0.5
            side = 1
        x1, f1 = x, fx
    else:
        raise EigenError("secant iteration did not converge")
    pts = sorted(history)
    mus = [m for _, m in pts]
    monotone = all(m1 >= m2 for m1, m2 in zip(mus, mus[1:]))
    if not monotone:
        log.warning("mu_1,rad was not monotone along the sampled radii: %s", pts)
    return TuneResult(x1, f1 + target, history, monotone)


def log_normalization_constant(psi: RadialField, tol: float = 1e-8) -> float:
    """kappa = exp(-1/2 int psi^2 ln psi^2), with t ln t := 0 at t = 0."""
    grid = psi.grid
    v2 = psi.values ** 2
    norm2 = float(np.dot(grid.cell, v2))
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"psi is not L^2-normalized (||psi||^2 = {norm2:.12g})")
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = np.where(v2 > 0, v2 * np.log(v2), 0.0)
    return math.exp(-0.5 * float(np.dot(grid.cell, ent)))
