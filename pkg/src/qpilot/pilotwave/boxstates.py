"""Analytic hard-wall box states on a grid.

Stationary states and two-level superpositions with known energies; used to
exercise the local-energy diagnostic without any numerical evolution (the
periodic split-step scheme cannot represent hard walls).
"""

from __future__ import annotations

import numpy as np

from .grid import Grid1D, WaveFunction1D


def box_energy(n_level: int, length: float, hbar: float = 1.0, m: float = 1.0) -> float:
    """E_n = n^2 pi^2 hbar^2 / (2 m L^2)."""
    return (n_level * np.pi * hbar / length) ** 2 / (2.0 * m)


def box_eigenstate(grid: Grid1D, left: float, right: float, n_level: int,
                   t: float = 0.0, hbar: float = 1.0, m: float = 1.0) -> WaveFunction1D:
    """phi_n(x) * exp(-i E_n t / hbar), zero outside [left, right]."""
    if n_level < 1:
        raise ValueError("n_level must be >= 1")
    if not (grid.x_min < left < right < grid.x_max):
        raise ValueError("box must sit strictly inside the domain")
    length = right - left
    x = grid.x
    inside = (x >= left) & (x <= right)
    phi = np.zeros(grid.n)
    phi[inside] = np.sin(n_level * np.pi * (x[inside] - left) / length)
    phi /= np.sqrt(np.sum(phi**2) * grid.dx)
    energy = box_energy(n_level, length, hbar, m)
    psi = phi * np.exp(-1j * energy * t / hbar)
    return WaveFunction1D(grid, psi, time=t)


def box_superposition(grid: Grid1D, left: float, right: float,
                      n1: int, n2: int, t: float = 0.0,
                      hbar: float = 1.0, m: float = 1.0) -> WaveFunction1D:
    """Equal-weight superposition of two box levels at time t."""
    a = box_eigenstate(grid, left, right, n1, t, hbar, m)
    b = box_eigenstate(grid, left, right, n2, t, hbar, m)
    psi = (a.values + b.values) / np.sqrt(2.0)
    norm = np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return WaveFunction1D(grid, psi / norm, time=t)
