"""One-dimensional compressible quantum Navier-Stokes in Lagrangian coordinates."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Grid,
    OmegaState,
    PhiLevelRoots,
    PhysicalParams,
    State,
    XiState,
    c_pair,
    f_effective,
    from_omega,
    from_xi,
    phi,
    pressure,
    solve_phi_level,
    to_omega,
    to_xi,
)
from .discretization import (  # noqa: E402
    ScalarField,
    Tendency,
    bohm_residual,
    fd_derivative,
    rhs_omega,
    rhs_primitive,
    rhs_xi,
)
from .integrator import InitialData, SimConfig, Trajectory, advance, initial_data, rk4_step, stable_dt  # noqa: E402
from .diagnostics import (  # noqa: E402
    DiagnosticsRecord,
    bd_entropy,
    decay_norms,
    eff_pressure_sup,
    energy,
    energy_balance_residual,
    germain_lefloch,
)
from .experiments import LimitStudyConfig, RateFit, cross_check, decay_study, limit_study, rate_fit  # noqa: E402
