"""Vanishing-dispersion study, cross-formulation checks and decay sampling."""

import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import trapezoid
from .diagnostics import decay_norms
from .errors import ConfigError, DegenerateDataError, RegimeError, StepError, StudyError
from .integrator import advance, initial_data, stable_dt
from .stencils import STENCILS

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LimitStudyConfig:
    base: object  # SimConfig, formulation=primitive
    eps_list: tuple
    t_star: float
    derivative_orders: tuple = (0, 1, 2, 3)
    # compare the smallest-eps gap with the N/2 -> N discretization change first
    refine_check: bool = True
    max_N: int = 16384

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_list)
        object.__setattr__(self, "eps_list", eps)
        object.__setattr__(self, "derivative_orders", tuple(int(k) for k in self.derivative_orders))
        if self.base.formulation != "primitive":
            raise ConfigError("limit study runs the primitive formulation")
        if not eps:
            raise ConfigError("eps_list is empty")
        if any(e <= 0 for e in eps):
            raise ConfigError(f"eps_list entries must be > 0, got {eps}")
        if any(a <= b for a, b in zip(eps, eps[1:])):
            raise ConfigError(f"eps_list must be strictly decreasing, got {eps}")
        nu = self.base.params.nu
        if any(e > nu for e in eps):
            raise RegimeError(f"every eps must be <= nu={nu}, got {eps}")
        if not 0 < self.t_star <= self.base.t_final:
            raise ConfigError(f"t_star must lie in (0, t_final={self.base.t_final}], got {self.t_star}")
        if not set(self.derivative_orders) <= {0, 1, 2, 3}:
            raise ConfigError(f"derivative_orders must be a subset of {{0,1,2,3}}, got {self.derivative_orders}")


@dataclass
class RateFit:
    slope: float
    intercept: float
    residual: float
    n_points: int


@dataclass
class LimitStudyResult:
    t_star: float
    N: int
    dt: float
    rows: list  # (eps, k, error)
    fits: dict  # k -> RateFit | None
    flags: dict = field(default_factory=dict)  # k -> reason a fit was rejected
    precondition: dict = None

    def errors(self, k):
        return [(e, err) for e, kk, err in self.rows if kk == k]


def rate_fit(points):
    """Least-squares line through ``(ln eps, ln error)``; ``slope`` is the observed rate."""
    points = list(points)
    if len(points) < 3:
        raise DegenerateDataError(f"rate fit needs >= 3 points, got {len(points)}")
    eps = np.array([p[0] for p in points], dtype=float)
    err = np.array([p[1] for p in points], dtype=float)
    if np.any(err <= 0) or np.any(eps <= 0) or not np.all(np.isfinite(err)):
        raise DegenerateDataError("rate fit needs strictly positive finite errors and eps")
    x = np.log(eps)
    y = np.log(err)
    xc = x - x.mean()
    slope = float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
    intercept = float(y.mean() - slope * x.mean())
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return RateFit(slope, intercept, residual, len(points))


def derivative_error(a, b, k, grid):
    """L2 norm of the k-th derivative of ``a.v - b.v`` plus that of ``a.u - b.u``."""
    total = 0.0
    for da in (a.v - b.v, a.u - b.u):
        if k:
            da = STENCILS[k](da, grid.dx)
        total += math.sqrt(trapezoid(da * da, grid.dx))
    return total


def _shared_dt(base, eps_values, N):
    cfg = base.replace(N=N)
    ini = cfg.initial
    s0 = initial_data(ini.family, {"A": ini.A, "B": ini.B, "sigma": ini.sigma, "center": ini.center}, cfg.grid)
    # margin for v_min drifting below its initial value during the run
    return 0.9 * min(stable_dt(s0, base.params.with_eps(e), cfg.grid, base.cfl) for e in eps_values)


def _run_final(cfg):
    return advance(cfg).final


def _run_eps(base, eps, t_star, N, dt):
    cfg = base.replace(params=base.params.with_eps(eps), N=N, t_final=t_star, snapshot_interval=t_star, dt=dt)
    try:
        return _run_final(cfg)
    except StepError as err:
        raise StudyError(f"run with eps={eps} failed: {err}", eps=eps) from err


def _map(fn, args, workers):
    if workers and workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, *zip(*args)))
    return [fn(*a) for a in args]


def limit_study(config, workers=None):
    """Distance between eps-runs and the eps = 0 Navier-Stokes run at ``t_star``.

    Every run shares one grid and one fixed time step, so time-stepping
    error is the same for all eps.  With ``refine_check`` the grid is
    doubled until the smallest-eps error exceeds ten times the change
    of the difference field under N/2 -> N refinement.
    """
    base = config.base
    if workers is None:
        workers = min(len(config.eps_list), os.cpu_count() or 1)
    N = base.N
    while True:
        dt = _shared_dt(base, (0.0,) + config.eps_list, N)
        reference = _run_eps(base, 0.0, config.t_star, N, dt)
        finals = _map(_run_eps, [(base, e, config.t_star, N, dt) for e in config.eps_list], workers)
        grid = base.replace(N=N).grid
        pre = None
        if config.refine_check:
            pre = _refinement_gap(base, config, N, reference, finals[-1], grid)
            if not pre["passed"] and 2 * N <= config.max_N:
                log.warning("discretization gap %.3e too large against eps-gap %.3e at N=%d; doubling N",
                            pre["gap"], pre["error"], N)
                N *= 2
                continue
        break

    rows = []
    fits, flags = {}, {}
    for k in config.derivative_orders:
        pts = []
        for e, fin in zip(config.eps_list, finals):
            err = derivative_error(fin, reference, k, grid)
            rows.append((e, k, err))
            pts.append((e, err))
        if any(p[1] <= 0 for p in pts):
            fits[k], flags[k] = None, "zero-error"
        elif len(pts) < 3:
            fits[k], flags[k] = None, "too-few-points"
        else:
            fits[k] = rate_fit(pts)
    return LimitStudyResult(config.t_star, N, dt, rows, fits, flags, pre)


def _refinement_gap(base, config, N, reference, smallest, grid):
    coarse = N // 2
    eps_min = config.eps_list[-1]
    dt = _shared_dt(base, (0.0,) + config.eps_list, coarse)
    ref_c = _run_eps(base, 0.0, config.t_star, coarse, dt)
    small_c = _run_eps(base, eps_min, config.t_star, coarse, dt)
    cgrid = base.replace(N=coarse).grid
    fine_dv = (smallest.v - reference.v)[::2]
    fine_du = (smallest.u - reference.u)[::2]
    gap = 0.0
    for a, b in ((fine_dv, small_c.v - ref_c.v), (fine_du, small_c.u - ref_c.u)):
        d = a - b
        gap += math.sqrt(trapezoid(d * d, cgrid.dx))
    error = derivative_error(smallest, reference, 0, grid)
    return {"N": N, "coarse_N": coarse, "gap": gap, "error": error, "passed": error > 10.0 * gap}


@dataclass
class CrossCheckReport:
    N: int
    discrepancy: dict  # (a, b) -> max nodal discrepancy at N
    refined: dict = field(default_factory=dict)  # (a, b) -> same at 2N
    ratio: dict = field(default_factory=dict)
    shrinks: dict = field(default_factory=dict)  # ratio >= 3


def _max_discrepancy(a, b):
    return float(max(np.max(np.abs(a.v - b.v)), np.max(np.abs(a.u - b.u))))


def _final_states(config, formulations, N):
    return {f: advance(config.replace(formulation=f, N=N, snapshot_interval=config.t_final or None)).final
            for f in formulations}


def cross_check(config, formulations, refine=True):
    """Advance the same data under each formulation and compare final ``(v, u)``."""
    formulations = sorted(set(formulations))
    if "xi" in formulations and config.params.eps > config.params.nu:
        raise RegimeError("the xi formulation needs eps <= nu")
    finals = _final_states(config, formulations, config.N)
    pairs = list(itertools.combinations(formulations, 2))
    report = CrossCheckReport(config.N, {p: _max_discrepancy(finals[p[0]], finals[p[1]]) for p in pairs})
    if refine:
        fine = _final_states(config, formulations, 2 * config.N)
        for p in pairs:
            d2 = _max_discrepancy(fine[p[0]], fine[p[1]])
            report.refined[p] = d2
            d1 = report.discrepancy[p]
            report.ratio[p] = d1 / d2 if d2 > 0 else (math.inf if d1 > 0 else 1.0)
            report.shrinks[p] = (d1 == 0 and d2 == 0) or report.ratio[p] >= 3.0
    return report


@dataclass
class DecayStudy:
    times: list
    sup: list
    grad: list
    non_monotone_tail: bool


def decay_study(config, sample_times, tail_tolerance=0.05):
    """decay_norms at each sample time; flags >5% rises over the second half of the samples."""
    sample_times = [float(t) for t in sample_times]
    if any(b <= a for a, b in zip(sample_times, sample_times[1:])):
        raise ConfigError("sample_times must be strictly increasing")
    if sample_times and sample_times[-1] > config.t_final:
        raise ConfigError("sample_times must not exceed t_final")
    traj = advance(config.replace(extra_times=tuple(sample_times)))
    sup, grad = [], []
    for t in sample_times:
        s, g = decay_norms(traj.at(t), traj.grid)
        sup.append(s)
        grad.append(g)
    tail = len(sample_times) // 2
    flag = False
    for series in (sup, grad):
        for a, b in zip(series[tail:], series[tail + 1:]):
            if b > a * (1.0 + tail_tolerance) and b > 0:
                flag = True
    return DecayStudy(sample_times, sup, grad, flag)
