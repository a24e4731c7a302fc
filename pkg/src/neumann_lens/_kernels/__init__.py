"""Hot loops, compiled when available.

The Cython extension ``_core`` provides the sequential sweeps
(``neumann_solve``, ``rk4_radial``). The power sums behind the recentering
shift (``balance_residual``, ``bisect_shift``) always use numpy: its
vectorized ``power`` beats a scalar libm loop, as
``benchmarks/bench_kernels.py`` shows. ``_core`` still carries those two
for comparison. Set ``NEUMANN_LENS_PURE=1`` to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("NEUMANN_LENS_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback

neumann_solve = _impl.neumann_solve
rk4_radial = _impl.rk4_radial
balance_residual = _fallback.balance_residual
bisect_shift = _fallback.bisect_shift

__all__ = ["BACKEND", "neumann_solve", "balance_residual", "bisect_shift", "rk4_radial"]
