"""Seeded inverse-CDF sampling of initial positions from |psi|^2."""

from __future__ import annotations

import numpy as np

from .grid import WaveFunction1D


def sample_initial_positions(psi0: WaveFunction1D, n: int, seed: int) -> np.ndarray:
    """Draw n positions from the density of psi0, deterministically per seed.

    Uses the piecewise-linear CDF on cell edges, inverted by interpolation.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    rho = np.abs(psi0.values) ** 2
    dx = psi0.grid.dx
    edges = psi0.grid.x_min + dx * np.arange(psi0.grid.n + 1)
    cdf = np.concatenate([[0.0], np.cumsum(rho * dx)])
    cdf /= cdf[-1]
    u = np.random.default_rng(seed).random(n)
    return np.interp(u, cdf, edges)
