"""Centered second-order difference stencils on uniform nodal arrays.

Ghost nodes beyond either end hold the far-field constant, so a constant
field has identically zero derivatives, boundary nodes included.
"""

import numpy as np


def d1(f, dx, far=0.0):
    """(f[j+1] - f[j-1]) / (2 dx)."""
    out = np.empty_like(f)
    np.subtract(f[2:], f[:-2], out=out[1:-1])
    out[0] = f[1] - far
    out[-1] = far - f[-2]
    out *= 0.5 / dx
    return out


def d2(f, dx, far=0.0):
    """(f[j+1] - 2 f[j] + f[j-1]) / dx**2."""
    out = np.empty_like(f)
    np.add(f[2:], f[:-2], out=out[1:-1])
    out[0] = f[1] + far
    out[-1] = far + f[-2]
    out -= 2.0 * f
    out *= 1.0 / (dx * dx)
    return out


def d3(f, dx, far=0.0):
    """(f[j+2] - 2 f[j+1] + 2 f[j-1] - f[j-2]) / (2 dx**3)."""
    g = np.empty(f.size + 4)
    g[:2] = far
    g[2:-2] = f
    g[-2:] = far
    return (g[4:] - 2.0 * g[3:-1] + 2.0 * g[1:-3] - g[:-4]) * (0.5 / dx**3)


STENCILS = {1: d1, 2: d2, 3: d3}


def div_flux(w, coef, dx, far_w=0.0, far_coef=1.0):
    """Compact ``(coef * w_x)_x`` with fluxes at the half nodes.

    ``coef`` at ``j+1/2`` is the mean of its two nodal neighbours.  Unlike
    ``d1(coef * d1(w))`` this damps the odd-even mode.
    """
    n = w.size
    wp = np.empty(n + 2)
    wp[0] = far_w
    wp[1:-1] = w
    wp[-1] = far_w
    cp = np.empty(n + 2)
    cp[0] = far_coef
    cp[1:-1] = coef
    cp[-1] = far_coef
    flux = (cp[1:] + cp[:-1]) * (wp[1:] - wp[:-1])
    return (flux[1:] - flux[:-1]) * (0.5 / (dx * dx))
