"""Radial domains, uniform grids and N-dimensional radial quadrature.

Every node ``r_i`` owns the dual cell ``[r_{i-1/2}, r_{i+1/2}]`` (clipped to
``[a, b]``) and the quadrature uses the exact measure of that shell,

    cell_i = sigma_{N-1} * int_{cell} rho^(N-1) d rho,

so that ``integrate(f) = sum_i cell_i f_i``. In the ``w_i r_i^(N-1)`` form
this is a second-order rule whose total is exactly ``|Omega|``. The same
measure drives the discrete operators, which keeps them self-adjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MIN_INTERVALS = 16


def sphere_area(N: int, sigma0: float = 2.0) -> float:
    """Surface measure of the unit (N-1)-sphere; ``sigma0`` overrides N = 1."""
    if N == 1:
        return float(sigma0)
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def ball_volume(N: int) -> float:
    """omega_N = |B_1| in R^N."""
    return math.pi ** (N / 2) / math.gamma(N / 2 + 1)


@dataclass(frozen=True)
class RadialDomain:
    """Ball (``a == 0``) or annulus ``a < |x| < b`` in R^N.

    ``sigma0`` is the measure attached to the 0-sphere when ``N == 1``.
    The default 1 makes ``(a, b)`` carry its plain length; 2 treats the
    interval ``(-b, b)`` as the 1-D ball.
    """

    a: float
    b: float
    N: int
    sigma0: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.a < self.b):
            raise ValueError(f"need 0 <= a < b, got a={self.a}, b={self.b}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.N}")
        if self.sigma0 not in (1.0, 2.0):
            raise ValueError("sigma0 must be 1 or 2")

    @property
    def is_ball(self) -> bool:
        return self.a == 0.0

    @property
    def sigma(self) -> float:
        return sphere_area(self.N, self.sigma0)

    @property
    def volume(self) -> float:
        return self.sigma * (self.b**self.N - self.a**self.N) / self.N

    @property
    def critical_exponent(self) -> float:
        """(N+2)/(N-2); infinite for N <= 2."""
        return math.inf if self.N <= 2 else (self.N + 2) / (self.N - 2)

    def shell(self, r0, r1):
        """Measure of the shell between radii r0 <= r1."""
        N = self.N
        return self.sigma * (np.asarray(r1) ** N - np.asarray(r0) ** N) / N


@dataclass(frozen=True, eq=False)
class RadialGrid:
    domain: RadialDomain
    r: np.ndarray
    cell: np.ndarray
    edge_radius: np.ndarray = field(repr=False)

    @property
    def M(self) -> int:
        """Number of intervals (the grid has M + 1 nodes)."""
        return self.r.size - 1

    @property
    def h(self) -> float:
        return (self.domain.b - self.domain.a) / self.M

    @property
    def N(self) -> int:
        return self.domain.N

    @property
    def volume(self) -> float:
        return float(self.cell.sum())

    @property
    def weights(self) -> np.ndarray:
        """Weights ``w_i`` with ``integrate(f) = sigma * sum w_i f_i r_i^(N-1)``.

        Undefined (nan) at the origin of a ball with N >= 2, where the
        node still owns a cell of positive measure.
        """
        rn = self.r ** (self.N - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = self.cell / (self.domain.sigma * rn)
        return np.where(rn > 0, w, np.nan)

    def field(self, values) -> "RadialField":
        return RadialField(self, values)

    def __call__(self, func) -> "RadialField":
        return RadialField(self, func(self.r))


def build_grid(domain: RadialDomain, M: int) -> RadialGrid:
    """Uniform grid with ``M`` intervals on ``[a, b]``."""
    if M < MIN_INTERVALS:
        raise ValueError(f"need at least {MIN_INTERVALS} intervals, got {M}")
    a, b = domain.a, domain.b
    if not a < b:
        raise ValueError("empty domain")
    r = np.linspace(a, b, M + 1)
    h = (b - a) / M
    mids = a + h * (np.arange(M) + 0.5)
    left = np.concatenate(([a], mids))
    right = np.concatenate((mids, [b]))
    cell = domain.shell(left, right)
    r.setflags(write=False)
    cell.setflags(write=False)
    mids.setflags(write=False)
    return RadialGrid(domain, r, cell, mids)


class RadialField:
    """Values of a radial function on the nodes of a grid."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: RadialGrid, values):
        v = np.array(values, dtype=float)
        if v.ndim == 0:
            v = np.full(grid.r.shape, float(v))
        if v.shape != grid.r.shape:
            raise ValueError(f"field has {v.size} values, grid has {grid.r.size} nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        self.grid = grid
        self.values = v

    def __repr__(self):
        return f"RadialField(M={self.grid.M}, max={np.max(np.abs(self.values)):.4g})"

    def _coerce(self, other):
        if isinstance(other, RadialField):
            if other.grid is not self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return RadialField(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RadialField(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return RadialField(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other):
        return RadialField(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return RadialField(self.grid, self.values / self._coerce(other))

    def __neg__(self):
        return RadialField(self.grid, -self.values)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


def integrate(grid: RadialGrid, f) -> float:
    """Integral of a radial field over the domain."""
    v = f.values if isinstance(f, RadialField) else np.asarray(f, dtype=float)
    return float(np.dot(grid.cell, v))


def lq_norm(grid: RadialGrid, f, q: float) -> float:
    """L^q norm over the domain; ``q = inf`` gives the max norm."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    v = f.values if isinstance(f, RadialField) else np.asarray(f, dtype=float)
    if math.isinf(q):
        return float(np.max(np.abs(v)))
    return float(np.dot(grid.cell, np.abs(v) ** q) ** (1.0 / q))


def mean(grid: RadialGrid, f) -> float:
    return integrate(grid, f) / grid.volume


# -- CSV -------------------------------------------------------------------

def write_field_csv(path, fld: RadialField, column: str = "value") -> None:
    d = fld.grid.domain
    header = f"# N={d.N} a={d.a!r} b={d.b!r}"
    rows = np.column_stack([fld.grid.r, fld.values])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        fh.write(f"r,{column}\n")
        np.savetxt(fh, rows, delimiter=",", fmt="%.17g")


def read_field_csv(path, sigma0: float = 1.0) -> RadialField:
    """Inverse of :func:`write_field_csv`; the grid is rebuilt from the header."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise ValueError("missing '# N=.. a=.. b=..' header")
    meta = dict(tok.split("=", 1) for tok in text[0][1:].split())
    domain = RadialDomain(float(meta["a"]), float(meta["b"]), int(meta["N"]), sigma0)
    data = np.loadtxt(text[2:], delimiter=",", ndmin=2)
    grid = build_grid(domain, data.shape[0] - 1)
    if not np.allclose(grid.r, data[:, 0], rtol=0, atol=1e-12 * max(1.0, domain.b)):
        raise ValueError("nodes in file are not a uniform grid on [a, b]")
    return RadialField(grid, data[:, 1])
