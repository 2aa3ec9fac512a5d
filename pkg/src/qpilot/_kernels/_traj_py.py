"""NumPy fallback for the trajectory RK4 kernel.

Arithmetic is written expression-for-expression like the Cython version so
both backends produce bit-identical doubles.
"""

from __future__ import annotations

import numpy as np


def _interp(pos, v_grid, defined, x_min, dx):
    n = v_grid.shape[0]
    idx = np.floor((pos - x_min) / dx).astype(np.int64)
    np.clip(idx, 0, n - 2, out=idx)
    frac = (pos - (x_min + idx * dx)) / dx
    val = v_grid[idx] + frac * (v_grid[idx + 1] - v_grid[idx])
    ok = (defined[idx] != 0) & (defined[idx + 1] != 0)
    return val, ok


def advance_samples(x, last_v, flags, v_grid, defined, x_min, dx, dt):
    """One RK4 step for every sample on a velocity grid frozen in time.

    Samples that touch an undefined grid region fall back to their last
    defined velocity and are flagged.  Updates x, last_v and flags in place.
    """
    k1, ok1 = _interp(x, v_grid, defined, x_min, dx)
    k1 = np.where(ok1, k1, last_v)
    last_v[:] = k1
    flags[:] |= ~ok1

    k2, ok2 = _interp(x + (0.5 * dt) * k1, v_grid, defined, x_min, dx)
    k2 = np.where(ok2, k2, k1)
    flags[:] |= ~ok2

    k3, ok3 = _interp(x + (0.5 * dt) * k2, v_grid, defined, x_min, dx)
    k3 = np.where(ok3, k3, k1)
    flags[:] |= ~ok3

    k4, ok4 = _interp(x + dt * k3, v_grid, defined, x_min, dx)
    k4 = np.where(ok4, k4, k1)
    flags[:] |= ~ok4

    x[:] = x + dt * ((k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0)
