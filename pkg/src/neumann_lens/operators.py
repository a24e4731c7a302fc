"""Discrete radial Neumann Laplacian and its zero-average inverses.

The discretization is conservative: with conductances
``e_{i+1/2} = sigma r_{i+1/2}^(N-1) / h`` the stiffness ``S`` is the path
Laplacian ``(S u)_i = sum_j e_ij (u_i - u_j)`` and ``-Lap u ~ S u / cell``.
No flux leaves through ``r = a`` or ``r = b``, which is the Neumann
condition; at the origin of a ball the first row reduces to
``2N (u_0 - u_1) / h^2``. Constants are in the kernel and ``S`` is exactly
symmetric, so ``L`` is self-adjoint in the ``cell``-weighted product.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import _kernels
from .grid import RadialField, RadialGrid, integrate, lq_norm


class CompatibilityError(ValueError):
    """Right-hand side has nonzero average beyond tolerance."""


class NeumannLaplacian:
    def __init__(self, grid: RadialGrid):
        d = grid.domain
        self.grid = grid
        self.cell = np.ascontiguousarray(grid.cell)
        self.edge = np.ascontiguousarray(d.sigma * grid.edge_radius ** (d.N - 1) / grid.h)
        self.edge.setflags(write=False)

    def __repr__(self):
        d = self.grid.domain
        return f"NeumannLaplacian(N={d.N}, a={d.a}, b={d.b}, M={self.grid.M})"

    # raw array versions, used inside the solvers
    def stiffness(self, u: np.ndarray) -> np.ndarray:
        du = np.diff(u) * self.edge
        out = np.zeros_like(u)
        out[:-1] -= du
        out[1:] += du
        return out

    def dirichlet(self, u: np.ndarray) -> float:
        """Discrete ``int |grad u|^2``."""
        return float(np.dot(self.edge, np.diff(u) ** 2))

    def lap(self, u: np.ndarray) -> np.ndarray:
        return self.stiffness(u) / self.cell

    def solve(self, h: np.ndarray) -> np.ndarray:
        """K applied to ``h - mean(h)``; the result has zero average."""
        return _kernels.neumann_solve(self.edge, self.cell, np.ascontiguousarray(h, dtype=float))

    def tridiagonal(self):
        """(diag, off) of the symmetric matrix ``C^{-1/2} S C^{-1/2}``."""
        diag = np.zeros(self.grid.r.size)
        diag[:-1] += self.edge
        diag[1:] += self.edge
        s = np.sqrt(self.cell)
        return diag / self.cell, -self.edge / (s[:-1] * s[1:])

    def matrix(self) -> np.ndarray:
        """Dense ``L = C^{-1} S`` (for tests and small grids)."""
        n = self.grid.r.size
        S = np.zeros((n, n))
        i = np.arange(n - 1)
        S[i, i] += self.edge
        S[i + 1, i + 1] += self.edge
        S[i, i + 1] -= self.edge
        S[i + 1, i] -= self.edge
        return S / self.cell[:, None]


def _values(op: NeumannLaplacian, u) -> np.ndarray:
    if isinstance(u, RadialField):
        if u.grid is not op.grid:
            raise ValueError("field and operator live on different grids")
        return u.values
    v = np.asarray(u, dtype=float)
    if v.shape != op.grid.r.shape:
        raise ValueError("array does not match the operator grid")
    return v


def apply_laplacian(op: NeumannLaplacian, u) -> RadialField:
    """-Lap u with homogeneous Neumann closure."""
    return RadialField(op.grid, op.lap(_values(op, u)))


def inverse_neumann(op: NeumannLaplacian, h, tol: float = 1e-8) -> RadialField:
    """The zero-average inverse K.

    Raises CompatibilityError when ``|int h| > tol * ||h||_1``; within
    tolerance the average of ``h`` is projected out.
    """
    v = _values(op, h)
    total = integrate(op.grid, v)
    l1 = lq_norm(op.grid, v, 1)
    if abs(total) > tol * l1:
        raise CompatibilityError(f"int h = {total:.3e} exceeds {tol:.1e} * ||h||_1 = {tol * l1:.3e}")
    return RadialField(op.grid, op.solve(v))


def shifted_inverse(op: NeumannLaplacian, h, p: float, tol: float = 1e-8) -> RadialField:
    """K_p h = K h + c_p(K h)."""
    from .nonlinear_average import recenter

    if p <= 0:
        raise ValueError("K_p needs p > 0")
    return recenter(inverse_neumann(op, h, tol), p)


@lru_cache(maxsize=64)
def laplacian_for(grid: RadialGrid) -> NeumannLaplacian:
    """Shared operator per grid object (grids hash by identity)."""
    return NeumannLaplacian(grid)
