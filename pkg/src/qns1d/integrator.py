"""Explicit RK4 time stepping with a stability controller.

Outgoing waves are absorbed in a layer next to each end, where both
unknowns relax toward the far field ``(1, 0)``; without it the ghost
nodes act as a wall and reflected waves pollute long runs.

Trajectories are always recorded as ``(v, u)`` snapshots whatever the
formulation used internally, so runs of different formulations can be
compared node by node.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Grid, State, c_pair, from_omega, from_xi, to_omega, to_xi, trapezoid, OmegaState, XiState
from .discretization import omega_arrays, primitive_arrays, xi_arrays
from .errors import ConfigError, RegimeError, StepError
from .stencils import d1

log = logging.getLogger(__name__)

FORMULATIONS = ("primitive", "xi", "omega")
FAMILIES = ("gauss-bump", "double-bump")


@dataclass(frozen=True)
class InitialData:
    """Bump profile ``v0 = 1 + A g(x)``, ``u0 = B g(x)`` with ``g = exp(-x**2/sigma**2)``.

    ``double-bump`` superposes two copies of ``g`` centred at ``+-center``.
    """

    family: str = "gauss-bump"
    A: float = 0.3
    B: float = 0.2
    sigma: float = 2.0
    center: float = 5.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown initial-data family {self.family!r}; expected one of {FAMILIES}")
        if not self.A > -1:
            raise ConfigError(f"amplitude A must be > -1 so that v0 > 0, got {self.A}")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")


def initial_data(family, parameters, grid):
    """Cauchy data on ``grid``; ``parameters`` holds A, B, sigma and (double-bump) center."""
    spec = InitialData(family, **parameters)
    x = grid.x
    s2 = spec.sigma**2
    if spec.family == "gauss-bump":
        g = np.exp(-x * x / s2)
    else:
        g = np.exp(-((x - spec.center) ** 2) / s2) + np.exp(-((x + spec.center) ** 2) / s2)
    v0 = 1.0 + spec.A * g
    if not np.all(v0 > 0):
        raise ConfigError(f"initial specific volume is not positive (min {v0.min()!r}); reduce |A|")
    return State(v0, spec.B * g)


@dataclass(frozen=True)
class SimConfig:
    params: object
    L: float = 20.0
    N: int = 1024
    formulation: str = "primitive"
    initial: InitialData = InitialData()
    t_final: float = 1.0
    cfl: float = 1.0
    snapshot_interval: float = None
    positivity_floor: float = 1e-8
    boundary_tol: float = 1e-6
    # fixed step overriding the controller; experiments use it to share one dt policy
    dt: float = None
    extra_times: tuple = ()
    # absorbing layer: fraction of each half-domain next to the ends, peak relaxation rate
    sponge_fraction: float = 0.3
    sponge_rate: float = 20.0

    def __post_init__(self):
        if self.formulation not in FORMULATIONS:
            raise ConfigError(f"formulation must be one of {FORMULATIONS}, got {self.formulation!r}")
        if not (self.t_final >= 0 and math.isfinite(self.t_final)):
            raise ConfigError(f"t_final must be >= 0, got {self.t_final}")
        if not 0 < self.cfl <= 1:
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.snapshot_interval is not None and not self.snapshot_interval > 0:
            raise ConfigError(f"snapshot_interval must be > 0, got {self.snapshot_interval}")
        if not self.positivity_floor > 0:
            raise ConfigError("positivity_floor must be > 0")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be > 0")
        if not 0 <= self.sponge_fraction < 1:
            raise ConfigError(f"sponge_fraction must lie in [0, 1), got {self.sponge_fraction}")
        if not self.sponge_rate >= 0:
            raise ConfigError(f"sponge_rate must be >= 0, got {self.sponge_rate}")
        if self.formulation == "xi" and self.params.eps > self.params.nu:
            raise RegimeError(
                f"formulation=xi needs eps <= nu (got eps={self.params.eps}, nu={self.params.nu}): "
                "in the dispersive regime the effective-velocity system becomes complex"
            )
        Grid(self.L, self.N)

    @property
    def grid(self):
        return Grid(self.L, self.N)

    def snapshot_times(self):
        T = self.t_final
        if T == 0:
            return [0.0]
        step = self.snapshot_interval or T / 10
        n = int(math.floor(T / step + 1e-9))
        times = {k * step for k in range(n + 1)}
        times.update(t for t in self.extra_times if 0 <= t <= T)
        times.add(T)
        times = sorted(times)
        # merge near-duplicates produced by floating-point multiples
        out = [times[0]]
        for t in times[1:]:
            if t - out[-1] > 1e-12 * max(1.0, T):
                out.append(t)
        out[-1] = T
        return out

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass
class Trajectory:
    times: list
    states: list
    dissipation: list  # cumulative viscous dissipation at each snapshot
    params: object
    grid: Grid
    formulation: str
    step_count: int = 0
    dt_min: float = math.inf
    dt_max: float = 0.0
    dt_total: float = 0.0
    v_min_seen: float = math.inf
    v_max_seen: float = 0.0
    warnings: list = field(default_factory=list)

    @property
    def snapshots(self):
        return list(zip(self.times, self.states))

    @property
    def cumulative_dissipation(self):
        return self.dissipation[-1]

    @property
    def final(self):
        return self.states[-1]

    def at(self, t):
        """Snapshot recorded at time ``t`` (exact match up to 1e-12)."""
        for ti, s in zip(self.times, self.states):
            if abs(ti - t) <= 1e-12 * max(1.0, abs(t)):
                return s
        raise KeyError(f"no snapshot at t={t}")

    def dt_summary(self):
        mean = self.dt_total / self.step_count if self.step_count else 0.0
        return {"steps": self.step_count, "dt_min": self.dt_min if self.step_count else 0.0,
                "dt_max": self.dt_max, "dt_mean": mean}


def stable_dt(state, params, grid, cfl):
    """Largest step the controller allows: viscous, dispersive and acoustic limits."""
    v_min = float(np.min(state.v))
    dx = grid.dx
    limit = dx * dx * v_min * v_min / (8.0 * params.nu)
    if params.eps > 0:
        limit = min(limit, dx * dx * v_min**4 / (4.0 * params.eps))
    sound = math.sqrt(params.gamma * v_min ** (-params.gamma - 1.0))
    limit = min(limit, dx / sound)
    return cfl * limit


def rk4_step(rhs, state, dt, t=0.0, floor=None):
    """One classical RK4 step of ``y' = rhs(t, v, w)`` for the pair ``state = (v, w)``.

    With ``floor`` set, any stage whose ``v`` falls below it aborts the step.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    v, w = state

    def check(vs, ts):
        if floor is not None:
            j = int(np.argmin(vs))
            if not vs[j] >= floor:
                raise StepError(
                    f"specific volume {float(vs[j])!r} below floor {floor} at node {j}, t={ts!r}",
                    node=j, time=ts, v_min=float(vs[j]),
                )

    h = 0.5 * dt
    k1v, k1w = rhs(t, v, w)
    v2 = v + h * k1v
    check(v2, t + h)
    k2v, k2w = rhs(t + h, v2, w + h * k1w)
    v3 = v + h * k2v
    check(v3, t + h)
    k3v, k3w = rhs(t + h, v3, w + h * k2w)
    v4 = v + dt * k3v
    check(v4, t + dt)
    k4v, k4w = rhs(t + dt, v4, w + dt * k3w)
    s = dt / 6.0
    v_new = v + s * (k1v + 2.0 * (k2v + k3v) + k4v)
    w_new = w + s * (k1w + 2.0 * (k2w + k3w) + k4w)
    check(v_new, t + dt)
    return v_new, w_new


def dissipation_rate(v, u, params, grid):
    """``2 nu * int u_x**2 / v**2 dx`` (trapezoid)."""
    r = d1(u, grid.dx) / v
    return 2.0 * params.nu * trapezoid(r * r, grid.dx)


def sponge_profile(grid, fraction, rate):
    """Relaxation rate ``s(x)``: zero inside, rising as a quadratic ramp to ``rate`` at the ends.

    Returns None when the layer is switched off.
    """
    if fraction <= 0 or rate <= 0:
        return None
    width = fraction * grid.L
    r = np.clip((np.abs(grid.x) - (grid.L - width)) / width, 0.0, 1.0)
    return rate * r * r


def _with_sponge(rhs, s):
    if s is None:
        return rhs

    def damped(t, v, w):
        dv, dw = rhs(t, v, w)
        return dv - s * (v - 1.0), dw - s * w

    return damped


def _formulation(name, params, grid):
    """(rhs, to_internal, to_velocity) for one formulation."""
    dx = grid.dx
    if name == "primitive":
        return (
            lambda t, v, w: primitive_arrays(v, w, params, dx),
            lambda s: s.u,
            lambda v, w: w,
        )
    if name == "xi":
        c_plus, _ = c_pair(params.nu, params.eps)
        return (
            lambda t, v, w: xi_arrays(v, w, params, dx),
            lambda s: to_xi(s, params, grid).xi,
            lambda v, w: w + c_plus * d1(v, dx, 1.0) / (v * v),
        )
    two_nu = 2.0 * params.nu
    return (
        lambda t, v, w: omega_arrays(v, w, params, dx),
        lambda s: to_omega(s, params, grid).omega,
        lambda v, w: w + two_nu * d1(v, dx, 1.0) / (v * v),
    )


def _snapshot_state(name, v, w, params, grid):
    if name == "primitive":
        return State(v.copy(), w.copy())
    if name == "xi":
        return from_xi(XiState(v.copy(), w.copy()), params, grid)
    return from_omega(OmegaState(v.copy(), w.copy()), params, grid)


def advance(config, state0=None):
    """Integrate ``config`` to ``t_final``; raises StepError on a positivity failure.

    The StepError carries the partial trajectory as ``.trajectory``.
    """
    params = config.params
    grid = config.grid
    if state0 is None:
        ini = config.initial
        state0 = initial_data(ini.family, {"A": ini.A, "B": ini.B, "sigma": ini.sigma, "center": ini.center}, grid)
    rhs, to_internal, velocity = _formulation(config.formulation, params, grid)
    layer = sponge_profile(grid, config.sponge_fraction, config.sponge_rate)
    rhs = _with_sponge(rhs, layer)
    layer_mask = None if layer is None else layer > 0
    v = state0.v.copy()
    w = np.asarray(to_internal(state0), dtype=float).copy()

    traj = Trajectory([0.0], [state0], [0.0], params, grid, config.formulation)
    traj.v_min_seen = float(v.min())
    traj.v_max_seen = float(v.max())
    targets = config.snapshot_times()[1:]
    t = 0.0
    d_cum = 0.0
    rate = dissipation_rate(v, state0.u, params, grid)
    contaminated = False
    _check_boundary(traj, state0, 0.0, config)

    for target in targets:
        while t < target:
            dt = config.dt if config.dt is not None else stable_dt(_VView(v), params, grid, config.cfl)
            if t + dt >= target - 1e-12 * max(1.0, target):
                dt = target - t
                t_next = target
            else:
                t_next = t + dt
            try:
                v, w = rk4_step(rhs, (v, w), dt, t, config.positivity_floor)
            except StepError as err:
                err.trajectory = traj
                raise
            u = velocity(v, w)
            new_rate = dissipation_rate(v, u, params, grid)
            d_cum += 0.5 * dt * (rate + new_rate)
            rate = new_rate
            t = t_next
            traj.step_count += 1
            traj.dt_min = min(traj.dt_min, dt)
            traj.dt_max = max(traj.dt_max, dt)
            traj.dt_total += dt
            vmin, vmax = float(v.min()), float(v.max())
            traj.v_min_seen = min(traj.v_min_seen, vmin)
            traj.v_max_seen = max(traj.v_max_seen, vmax)
            if not np.isfinite(vmax) or not np.all(np.isfinite(w)):
                err = StepError(f"non-finite state at t={t!r}", time=t)
                err.trajectory = traj
                raise err
        snap = _snapshot_state(config.formulation, v, w, params, grid)
        traj.times.append(t)
        traj.states.append(snap)
        traj.dissipation.append(d_cum)
        if not contaminated:
            contaminated = _check_boundary(traj, snap, t, config)
        if layer_mask is not None and _check_layer(traj, snap, t, config, layer_mask):
            layer_mask = None
    return traj


class _VView:
    # stable_dt only reads .v; avoids validating a State every step
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v


def _check_layer(traj, state, t, config, mask):
    dev = max(np.max(np.abs(state.v[mask] - 1.0)), np.max(np.abs(state.u[mask])))
    if dev > config.boundary_tol:
        msg = (f"absorbing layer active: deviation {dev:.3e} at t={t:g}; "
               "energy removed there is not part of the dissipation budget")
        traj.warnings.append(msg)
        log.info(msg)
        return True
    return False


def _check_boundary(traj, state, t, config):
    dev = max(abs(state.v[0] - 1.0), abs(state.v[-1] - 1.0), abs(state.u[0]), abs(state.u[-1]))
    if dev > config.boundary_tol:
        msg = f"boundary contamination: far-field deviation {dev:.3e} > {config.boundary_tol:g} at t={t:g}"
        traj.warnings.append(msg)
        log.warning(msg)
        return True
    return False
