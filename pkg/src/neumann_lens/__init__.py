"""Least-energy nodal solutions of -Lap u = |u|^(p-1) u with Neumann data on radial domains."""

from ._kernels import BACKEND
from .eigen import EigenPair, eigenpair, log_normalization_constant, radial_eigenpair, tune_annulus
from .grid import (
    RadialDomain,
    RadialField,
    RadialGrid,
    build_grid,
    integrate,
    lq_norm,
    read_field_csv,
    write_field_csv,
)
from .nonlinear_average import cp, recenter, sign_balance
from .operators import NeumannLaplacian, apply_laplacian, inverse_neumann, shifted_inverse
from .qualitative import (
    ball_nonexistence_scan,
    check_monotone,
    flip_rearrange,
    pohozaev_endpoint,
    pohozaev_profile,
)
from .shooting import ShootingConfig, SolutionRecord, integrate_radial, shoot
from .sweep import SweepConfig, limit_u1, sweep, write_outputs
from .variational import (
    LevelRecord,
    VariationalConfig,
    VariationalResult,
    dual_energy_phi,
    energy_I,
    energy_I0,
    level_L,
    level_record,
    maximize_D,
    minimize_L0,
    minimize_lambda,
    scale_to_solution,
)

__version__ = "0.1.0"
