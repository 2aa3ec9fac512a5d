# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython trajectory RK4 kernel; mirrors _traj_py arithmetic exactly."""

from libc.math cimport floor

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _interp_one(double pos, double[::1] v_grid, unsigned char[::1] defined,
                               double x_min, double dx, long n, bint* ok) nogil:
    cdef long idx = <long>floor((pos - x_min) / dx)
    if idx < 0:
        idx = 0
    elif idx > n - 2:
        idx = n - 2
    cdef double frac = (pos - (x_min + idx * dx)) / dx
    ok[0] = defined[idx] != 0 and defined[idx + 1] != 0
    return v_grid[idx] + frac * (v_grid[idx + 1] - v_grid[idx])


def advance_samples(double[::1] x, double[::1] last_v, unsigned char[::1] flags,
                    double[::1] v_grid, unsigned char[::1] defined,
                    double x_min, double dx, double dt):
    """One RK4 step for every sample on a velocity grid frozen in time."""
    cdef long n_samples = x.shape[0]
    cdef long n = v_grid.shape[0]
    cdef long i
    cdef double k1, k2, k3, k4
    cdef bint ok

    with nogil:
        for i in range(n_samples):
            k1 = _interp_one(x[i], v_grid, defined, x_min, dx, n, &ok)
            if not ok:
                k1 = last_v[i]
                flags[i] = 1
            last_v[i] = k1

            k2 = _interp_one(x[i] + (0.5 * dt) * k1, v_grid, defined, x_min, dx, n, &ok)
            if not ok:
                k2 = k1
                flags[i] = 1

            k3 = _interp_one(x[i] + (0.5 * dt) * k2, v_grid, defined, x_min, dx, n, &ok)
            if not ok:
                k3 = k1
                flags[i] = 1

            k4 = _interp_one(x[i] + dt * k3, v_grid, defined, x_min, dx, n, &ok)
            if not ok:
                k4 = k1
                flags[i] = 1

            x[i] = x[i] + dt * ((k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0)
