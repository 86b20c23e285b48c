"""Scalar functionals evaluated on states and trajectories.

Integrals are composite trapezoid sums over the grid nodes, derivatives
use the solver's own centered stencils, and sup-norms are node maxima.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import f_effective, phi, to_omega, trapezoid
from .discretization import ScalarField
from .errors import DomainError
from .integrator import dissipation_rate
from .stencils import d1, d2

GL_EXPONENTS = (2, 3, 4)
# f**(a-2) is only evaluated for profiles bounded away from zero
GL_MIN_F = 1e-4


@dataclass
class DiagnosticsRecord:
    t: float
    energy: float
    dissipation_rate: float
    dissipation_cum: float
    bd_entropy: float
    v_min: float
    v_max: float
    sup_eff_pressure: float
    decay_sup: float
    decay_grad: float
    gl_ratios: dict = field(default_factory=dict)


def _positive(v):
    if not np.all(v > 0):
        raise DomainError("specific volume must be positive everywhere")


def _gradient_energy_density(v, params, grid):
    if params.eps == 0:
        return 0.0
    vx = d1(v, grid.dx, 1.0)
    v2 = v * v
    return 0.5 * params.eps**2 * vx * vx / (v2 * v2)


def energy(state, params, grid):
    """Total energy ``int Phi(v) + u**2/2 + (eps**2/2) v_x**2/v**4 dx``."""
    v, u = state.v, state.u
    _positive(v)
    density = phi(v, params.gamma) + 0.5 * u * u + _gradient_energy_density(v, params, grid)
    return trapezoid(density, grid.dx)


def energy_balance_residual(trajectory, params=None, grid=None, floor=1e-14):
    """max_t |E(t) + D(t) - E(0)| / max(E(0), floor) over the recorded snapshots."""
    params = params or trajectory.params
    grid = grid or trajectory.grid
    e = [energy(s, params, grid) for s in trajectory.states]
    e0 = e[0]
    worst = max(abs(et + dt - e0) for et, dt in zip(e, trajectory.dissipation))
    return worst / max(e0, floor)


def bd_entropy(state, params, grid):
    """``int Phi(v) + (u - 2 nu v_x/v**2)**2 / 2 + (eps**2/2) v_x**2/v**4 dx``."""
    _positive(state.v)
    omega = to_omega(state, params, grid).omega
    density = phi(state.v, params.gamma) + 0.5 * omega * omega + _gradient_energy_density(state.v, params, grid)
    return trapezoid(density, grid.dx)


def gl_prefactor(a):
    return (a - 1) ** 2 / 9


def germain_lefloch(f, a, grid):
    """Both sides of ``int f**a f_xx**2 >= ((a-1)/3)**2 int f**(a-2) f_x**4``.

    Returns ``(lhs, rhs)``; the inequality holds when ``lhs >= rhs``.
    """
    if not a > 1:
        raise ValueError(f"exponent a must be > 1, got {a}")
    vals = f.values
    if not np.all(vals > 0):
        raise DomainError("f must be positive everywhere")
    fx = d1(vals, grid.dx, f.far_field)
    fxx = d2(vals, grid.dx, f.far_field)
    lhs = trapezoid(vals**a * fxx * fxx, grid.dx)
    fx2 = fx * fx
    rhs = gl_prefactor(a) * trapezoid(vals ** (a - 2) * fx2 * fx2, grid.dx)
    return lhs, rhs


def gl_ratios(state, grid, exponents=GL_EXPONENTS):
    """rhs/lhs of the Germain-LeFloch inequality for f = v (NaN when min v < 1e-4)."""
    out = {}
    for a in exponents:
        if state.v.min() < GL_MIN_F:
            out[a] = float("nan")
            continue
        lhs, rhs = germain_lefloch(ScalarField(state.v, 1.0), a, grid)
        out[a] = rhs / lhs if rhs > 0 else 0.0
    return out


def eff_pressure_sup(state, params, grid):
    """max over nodes of ``omega_x + F(v)``."""
    _positive(state.v)
    omega = to_omega(state, params, grid).omega
    return float(np.max(d1(omega, grid.dx) + f_effective(state.v, params.nu, params.gamma)))


def _l2(f, dx):
    return float(np.sqrt(trapezoid(f * f, dx)))


def decay_norms(state, grid):
    """``(||(v-1, u)||_inf, ||v_x||_{H^1} + ||u_x||)`` with H^1 as L2(v_x) + L2(v_xx)."""
    v, u = state.v, state.u
    dx = grid.dx
    sup = float(max(np.max(np.abs(v - 1.0)), np.max(np.abs(u))))
    vx = d1(v, dx, 1.0)
    grad = _l2(vx, dx) + _l2(d2(v, dx, 1.0), dx) + _l2(d1(u, dx), dx)
    return sup, grad


def record(state, params, grid, t=0.0, dissipation_cum=0.0):
    sup, grad = decay_norms(state, grid)
    return DiagnosticsRecord(
        t=float(t),
        energy=energy(state, params, grid),
        dissipation_rate=dissipation_rate(state.v, state.u, params, grid),
        dissipation_cum=float(dissipation_cum),
        bd_entropy=bd_entropy(state, params, grid),
        v_min=float(state.v.min()),
        v_max=float(state.v.max()),
        sup_eff_pressure=eff_pressure_sup(state, params, grid),
        decay_sup=sup,
        decay_grad=grad,
        gl_ratios=gl_ratios(state, grid),
    )


def trajectory_records(trajectory):
    return [
        record(s, trajectory.params, trajectory.grid, t, d)
        for t, s, d in zip(trajectory.times, trajectory.states, trajectory.dissipation)
    ]


def eff_pressure_growth(records):
    """Smallest C with ``sup_eff_pressure(t) <= sup_eff_pressure(0) + C t`` on the records."""
    p0 = records[0].sup_eff_pressure
    rates = [(r.sup_eff_pressure - p0) / r.t for r in records[1:] if r.t > 0]
    return max([0.0] + rates)
