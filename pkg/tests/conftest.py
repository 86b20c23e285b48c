import numpy as np
import pytest
import sympy as sp

from qns1d import Grid, PhysicalParams, State

X = sp.Symbol("x", real=True)


def gauss(grid, A=0.3, B=0.2, sigma=2.0):
    g = np.exp(-grid.x**2 / sigma**2)
    return State(1.0 + A * g, B * g)


def sym_primitive_rhs(v_expr, u_expr, nu, eps, gamma):
    """Closed-form (v_t, u_t) of the Lagrangian system for symbolic profiles."""
    vx = sp.diff(v_expr, X)
    vxx = sp.diff(v_expr, X, 2)
    ux = sp.diff(u_expr, X)
    flux = -v_expr ** (-gamma) + 2 * nu * ux / v_expr**2
    if eps:
        flux += eps**2 * (-vxx / v_expr**4 + 2 * vx**2 / v_expr**5)
    return (sp.lambdify(X, ux, "numpy"), sp.lambdify(X, sp.diff(flux, X), "numpy"))


@pytest.fixture
def params():
    return PhysicalParams(1.0, 0.25, 2.0)


@pytest.fixture
def grid():
    return Grid(20.0, 512)


# acceptance lines collected here and echoed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
