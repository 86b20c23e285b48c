"""Finite-difference right-hand sides for the three equivalent formulations.

Pressure and dispersive terms ``(g)_x`` are assembled in flux form: the
nodal array ``g`` is built first and the centered first-derivative stencil
is applied to it afterwards.  Diffusion terms ``(a w_x)_x`` use the compact
three-point form with ``a`` averaged to half nodes, which damps odd-even
modes that the wide ``D1(a D1 w)`` composition leaves untouched.  Ghost
nodes carry far-field values (``v = 1``, velocities ``0``), so the constant
state ``(1, 0)`` is an exact discrete equilibrium.

The array-level ``*_arrays`` functions are what the time stepper calls;
they skip input validation.
"""

from dataclasses import dataclass

import numpy as np

from .core import c_pair
from .errors import DomainError, StateError
from .stencils import STENCILS, d1, d2, div_flux


@dataclass(frozen=True, eq=False)
class Tendency:
    """Time derivatives ``dv`` and ``dw`` (``dw`` is u_t, xi_t or omega_t)."""

    dv: np.ndarray
    dw: np.ndarray


@dataclass(frozen=True, eq=False)
class ScalarField:
    values: np.ndarray
    far_field: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def boundary_deviation(self):
        return float(max(abs(self.values[0] - self.far_field), abs(self.values[-1] - self.far_field)))


def fd_derivative(field, order, grid):
    """Centered derivative of order 1, 2 or 3; the result has far field 0."""
    if order not in STENCILS:
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order!r}")
    values = field.values
    if values.size - 1 < 2 * order:
        raise ValueError(f"need at least {2 * order} cells for order {order}")
    return ScalarField(STENCILS[order](values, grid.dx, field.far_field), 0.0)


def _require_positive(v):
    if not np.all(v > 0):
        j = int(np.argmin(v))
        raise StateError(f"non-positive specific volume {v[j]!r} at node {j}")


def dispersive_flux(v, dx):
    """``-v_xx/v**4 + 2 v_x**2/v**5`` at the nodes."""
    vx = d1(v, dx, 1.0)
    v2 = v * v
    v4 = v2 * v2
    return (-d2(v, dx, 1.0) + 2.0 * vx * vx / v) / v4


def primitive_arrays(v, u, params, dx):
    dv = d1(u, dx)
    dw = -d1(np.power(v, -params.gamma), dx, 1.0)
    inv_v2 = 1.0 / (v * v)
    dw += 2.0 * params.nu * div_flux(u, inv_v2, dx)
    if params.eps != 0:
        dw += params.eps**2 * d1(dispersive_flux(v, dx), dx)
    return dv, dw


def xi_arrays(v, xi, params, dx, u=None):
    c_plus, c_minus = c_pair(params.nu, params.eps)
    inv_v2 = 1.0 / (v * v)
    if u is None:
        u = xi + c_plus * d1(v, dx, 1.0) * inv_v2
    dv = d1(xi, dx) + c_plus * div_flux(v, inv_v2, dx, 1.0)
    relax = (params.gamma / c_plus) * np.power(v, 1.0 - params.gamma)
    dw = relax * (u - xi) + c_minus * div_flux(xi, inv_v2, dx)
    return dv, dw


def omega_arrays(v, omega, params, dx, u=None):
    two_nu = 2.0 * params.nu
    inv_v2 = 1.0 / (v * v)
    if u is None:
        u = omega + two_nu * d1(v, dx, 1.0) * inv_v2
    dv = d1(omega, dx) + two_nu * div_flux(v, inv_v2, dx, 1.0)
    relax = (params.gamma / two_nu) * np.power(v, 1.0 - params.gamma)
    dw = relax * (u - omega)
    if params.eps != 0:
        dw += params.eps**2 * d1(dispersive_flux(v, dx), dx)
    return dv, dw


def rhs_primitive(state, params, grid):
    """Tendency of ``(v, u)`` for the Lagrangian quantum Navier-Stokes system."""
    _require_positive(state.v)
    return Tendency(*primitive_arrays(state.v, state.u, params, grid.dx))


def rhs_xi(xi_state, params, grid, aux_u=None):
    """Tendency of ``(v, xi)``; ``u`` is rebuilt from ``(v, xi)`` unless ``aux_u`` is given."""
    c_pair(params.nu, params.eps)
    _require_positive(xi_state.v)
    u = None if aux_u is None else np.asarray(aux_u, dtype=float)
    return Tendency(*xi_arrays(xi_state.v, xi_state.xi, params, grid.dx, u))


def rhs_omega(omega_state, params, grid, aux_u=None):
    """Tendency of ``(v, omega)``; valid in every regime."""
    _require_positive(omega_state.v)
    u = None if aux_u is None else np.asarray(aux_u, dtype=float)
    return Tendency(*omega_arrays(omega_state.v, omega_state.omega, params, grid.dx, u))


def bohm_sides(rho, grid):
    """Both sides of the Bohm identity with ``eps**2`` divided out.

    Returns ``(2 rho ((sqrt rho)_yy / sqrt rho)_y, (rho_yy - rho_y**2/rho)_y)``.
    """
    r = rho.values
    if not np.all(r > 0):
        raise DomainError("density must be positive everywhere")
    far = rho.far_field
    dx = grid.dx
    s = np.sqrt(r)
    lhs = 2.0 * r * d1(d2(s, dx, np.sqrt(far)) / s, dx)
    ry = d1(r, dx, far)
    rhs = d1(d2(r, dx, far) - ry * ry / r, dx)
    return lhs, rhs


def bohm_residual(rho, grid):
    """Max interior mismatch of the Bohm identity; vanishes as ``dx**2``."""
    lhs, rhs = bohm_sides(rho, grid)
    # stencil reach of d1(d2(.)) is two nodes
    return float(np.max(np.abs(lhs - rhs)[2:-2]))
