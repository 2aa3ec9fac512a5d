"""Spatial grid and wavefunction containers for the 1D engine.

Natural units hbar = m = 1 by default; both can be overridden per call in
the functions that need them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-8


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic spatial grid plus the evolution time step."""

    x_min: float
    x_max: float
    n: int
    dt: float

    def __post_init__(self):
        if self.n < 256:
            raise ValueError("grid must have at least 256 points")
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers matching np.fft conventions."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)


@dataclass(frozen=True)
class WaveFunction1D:
    """Complex field on a grid at one time instant, unit L2 norm."""

    grid: Grid1D
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.n,):
            raise ValueError("values must match the grid size")
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise ValueError(f"wavefunction norm {self.norm()!r} deviates from 1")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dx))


def gaussian_packet(grid: Grid1D, x0: float, sigma: float, k0: float) -> WaveFunction1D:
    """Normalized Gaussian wave packet exp(-(x-x0)^2/(4 sigma^2) + i k0 x)."""
    if sigma < 4 * grid.dx:
        raise ValueError(f"sigma={sigma} under-resolved: need sigma >= 4*dx = {4 * grid.dx}")
    if x0 - 5 * sigma < grid.x_min or x0 + 5 * sigma > grid.x_max:
        raise ValueError("packet support (x0 +/- 5 sigma) clipped by the domain boundary")
    x = grid.x
    psi = np.exp(-((x - x0) ** 2) / (4 * sigma**2) + 1j * k0 * x)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return WaveFunction1D(grid, psi, time=0.0)


def superpose(a: WaveFunction1D, b: WaveFunction1D, ca: complex, cb: complex) -> WaveFunction1D:
    """Normalized superposition ca*a + cb*b on a shared grid."""
    if a.grid != b.grid:
        raise ValueError("wavefunctions live on different grids")
    psi = ca * a.values + cb * b.values
    psi = psi / np.sqrt(np.sum(np.abs(psi) ** 2) * a.grid.dx)
    return WaveFunction1D(a.grid, psi, time=a.time)
