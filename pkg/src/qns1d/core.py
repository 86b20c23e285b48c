"""Domain types, closed-form scalar laws and effective-velocity transforms.

The Lagrangian unknowns are the specific volume ``v = 1/rho`` and the
velocity ``u`` on a truncated line ``[-L, L]``; far from the origin the
state relaxes to ``(v, u) = (1, 0)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RegimeError
from .stencils import d1

LIMIT = "limit"
PARABOLIC = "intermediary/parabolic"
DISPERSIVE = "dispersive"


@dataclass(frozen=True)
class PhysicalParams:
    """Viscosity ``nu``, Planck constant ``eps`` and adiabatic exponent ``gamma``."""

    nu: float
    eps: float
    gamma: float

    def __post_init__(self):
        for name in ("nu", "eps", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.nu > 0:
            raise DomainError(f"nu must be > 0, got {self.nu}")
        if not self.eps >= 0:
            raise DomainError(f"eps must be >= 0, got {self.eps}")
        if not self.gamma >= 1:
            raise DomainError(f"gamma must be >= 1, got {self.gamma}")

    @property
    def regime(self):
        if self.eps == 0:
            return LIMIT
        if self.eps <= self.nu:
            return PARABOLIC
        return DISPERSIVE

    def with_eps(self, eps):
        return PhysicalParams(self.nu, eps, self.gamma)


@dataclass(frozen=True)
class Grid:
    """Uniform nodes ``x_j = -L + j*dx``, ``j = 0..N``, with ``dx = 2L/N``."""

    L: float
    N: int

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0):
            raise DomainError(f"half width L must be > 0, got {self.L}")
        if int(self.N) != self.N or self.N < 16 or self.N % 2:
            raise DomainError(f"N must be an even integer >= 16, got {self.N}")

    @property
    def dx(self):
        return 2.0 * self.L / self.N

    @property
    def x(self):
        # symmetric construction keeps x[j] == -x[N-j] bitwise
        j = np.arange(self.N + 1)
        return (j - self.N // 2) * self.dx

    @property
    def size(self):
        return self.N + 1

    def refined(self):
        return Grid(self.L, 2 * self.N)


def _check_positive(v, what="v"):
    v = np.asarray(v, dtype=float)
    if v.size and not np.all(v > 0):
        if v.ndim == 0:
            raise DomainError(f"{what} must be positive, got {float(v)!r}")
        j = int(np.argmin(v))
        raise DomainError(f"{what} must be positive everywhere; min {v[j]!r} at node {j}")
    return v


@dataclass(frozen=True, eq=False)
class State:
    """Nodal specific volume ``v`` and velocity ``u``."""

    v: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        v = _check_positive(self.v)
        u = np.asarray(self.u, dtype=float)
        if v.shape != u.shape or v.ndim != 1:
            raise DomainError(f"v and u must be 1-D arrays of equal length, got {v.shape}, {u.shape}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "u", u)

    @classmethod
    def equilibrium(cls, grid):
        return cls(np.ones(grid.size), np.zeros(grid.size))


@dataclass(frozen=True, eq=False)
class XiState:
    """``(v, xi)`` with ``xi = u - c_plus * v_x / v**2``."""

    v: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _check_positive(self.v))
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float))


@dataclass(frozen=True, eq=False)
class OmegaState:
    """``(v, omega)`` with ``omega = u - 2 nu v_x / v**2``."""

    v: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _check_positive(self.v))
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))


@dataclass(frozen=True)
class PhiLevelRoots:
    alpha: float
    beta: float


def pressure(v, gamma):
    """Lagrangian pressure ``v**(-gamma)``; works on scalars and arrays."""
    _check_positive(v)
    return np.power(v, -gamma) if isinstance(v, np.ndarray) else float(v) ** (-gamma)


def phi(v, gamma):
    """Relative potential energy, zero only at ``v = 1``.

    ``v - 1 + (v**(1-gamma) - 1)/(gamma - 1)`` for ``gamma > 1`` and
    ``v - 1 - ln v`` for ``gamma == 1``.
    """
    _check_positive(v)
    if gamma == 1:
        return v - 1 - np.log(v)
    return v - 1 + (np.power(v, 1 - gamma) - 1) / (gamma - 1)


def c_pair(nu, eps):
    """Roots ``c = nu +/- sqrt(nu**2 - eps**2)`` of ``c*(2nu - c) = eps**2``."""
    if eps > nu:
        raise RegimeError(
            f"eps={eps} > nu={nu}: c_plus/c_minus are complex, the xi formulation is unavailable"
        )
    root = math.sqrt((nu - eps) * (nu + eps))
    c_plus = nu + root
    # eps**2 / c_plus avoids cancellation when eps << nu
    c_minus = eps * eps / c_plus
    return c_plus, c_minus


def f_effective(v, nu, gamma):
    """Potential turning ``omega_x`` into the effective pressure ``omega_x + F(v)``."""
    _check_positive(v)
    if gamma == 2:
        return -(gamma / (2 * nu)) * np.log(v)
    return gamma / (2 * nu * (gamma - 2)) * np.power(v, 2 - gamma)


def trapezoid(f, dx):
    """Composite trapezoid rule over all nodes of a uniform grid."""
    return float(dx * (np.sum(f) - 0.5 * (f[0] + f[-1])))


def gradient_shift(v, grid):
    """``v_x / v**2`` with the shared centered stencil (ghost value v = 1)."""
    return d1(v, grid.dx, 1.0) / (v * v)


def to_xi(state, params, grid):
    c_plus, _ = c_pair(params.nu, params.eps)
    return XiState(state.v, state.u - c_plus * gradient_shift(state.v, grid))


def from_xi(xi_state, params, grid):
    c_plus, _ = c_pair(params.nu, params.eps)
    return State(xi_state.v, xi_state.xi + c_plus * gradient_shift(xi_state.v, grid))


def to_omega(state, params, grid):
    return OmegaState(state.v, state.u - 2 * params.nu * gradient_shift(state.v, grid))


def from_omega(omega_state, params, grid):
    return State(omega_state.v, omega_state.omega + 2 * params.nu * gradient_shift(omega_state.v, grid))


def _phi_log(x):
    return x - 1.0 - math.log(x)


def _bisect(f, lo, hi):
    # f(lo) and f(hi) have opposite signs; halve until the bracket stops shrinking
    flo = f(lo)
    for _ in range(2200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_phi_level(C):
    """Both positive roots of ``x - ln x - 1 = C``, returned as ``alpha <= 1 <= beta``."""
    C = float(C)
    if not C >= 0 or not math.isfinite(C):
        raise DomainError(f"level C must be a finite nonnegative number, got {C}")
    if C == 0:
        return PhiLevelRoots(1.0, 1.0)

    def g(x):
        return _phi_log(x) - C

    lo = min(1e-12, math.exp(-(C + 2.0)))
    hi = 1.0 + C + math.exp(min(C, 700.0)) + 10.0
    alpha = _bisect(g, lo, 1.0)
    beta = _bisect(g, 1.0, hi)
    return PhiLevelRoots(min(alpha, 1.0), max(beta, 1.0))
