"""Unitary time evolution: split-step Fourier with an optional delta barrier.

The barrier (the beam splitter) is a single-cell potential of height g/dx at
the grid point nearest its position, which converges to a true delta
potential as the grid is refined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid1D, WaveFunction1D

NORM_DRIFT_TOL = 1e-8


class NormDriftError(RuntimeError):
    """Norm left the unit sphere beyond tolerance; reduce dt (or refine dx)."""


@dataclass(frozen=True)
class DeltaBarrier:
    """Delta potential g * delta(x - position)."""

    strength: float
    position: float = 0.0

    def __post_init__(self):
        if self.strength < 0:
            raise ValueError("barrier strength must be non-negative")


def calibrate_delta_barrier(k0: float, hbar: float = 1.0, m: float = 1.0) -> float:
    """Strength g at which the barrier transmits exactly half at wavenumber k0.

    The delta-barrier transmission is T = 1 / (1 + (m g / hbar^2 k)^2), so
    g = hbar^2 k0 / m gives T = 1/2 with amplitudes t = 1/(1+i) and
    r = -i/(1+i).
    """
    if k0 <= 0:
        raise ValueError("k0 must be positive")
    return hbar**2 * k0 / m


def delta_transmission(k: float, g: float, hbar: float = 1.0, m: float = 1.0) -> float:
    """Plane-wave transmission probability of the delta barrier."""
    ratio = m * g / (hbar**2 * k)
    return 1.0 / (1.0 + ratio**2)


def delta_amplitudes(k: float, g: float, hbar: float = 1.0, m: float = 1.0) -> tuple[complex, complex]:
    """Plane-wave (transmitted, reflected) amplitudes of the delta barrier."""
    ratio = m * g / (hbar**2 * k)
    t = 1.0 / (1.0 + 1j * ratio)
    return t, t - 1.0


def potential_on_grid(grid: Grid1D, barrier: DeltaBarrier | None) -> np.ndarray:
    v = np.zeros(grid.n)
    if barrier is not None and barrier.strength > 0:
        idx = int(round((barrier.position - grid.x_min) / grid.dx)) % grid.n
        v[idx] = barrier.strength / grid.dx
    return v


class SplitStepEvolver:
    """Second-order symmetric split-step propagator on a fixed grid."""

    def __init__(self, grid: Grid1D, barrier: DeltaBarrier | None = None,
                 hbar: float = 1.0, m: float = 1.0):
        self.grid = grid
        self.barrier = barrier
        self.hbar = hbar
        self.m = m
        v = potential_on_grid(grid, barrier)
        self._exp_v_half = np.exp(-0.5j * v * grid.dt / hbar)
        self._exp_k = np.exp(-0.5j * hbar * grid.k**2 * grid.dt / m)

    def step_values(self, values: np.ndarray) -> np.ndarray:
        out = self._exp_v_half * values
        out = np.fft.ifft(self._exp_k * np.fft.fft(out))
        return self._exp_v_half * out

    def advance(self, psi: WaveFunction1D, steps: int) -> WaveFunction1D:
        values = psi.values
        for _ in range(steps):
            values = self.step_values(values)
        out = WaveFunction1D.__new__(WaveFunction1D)
        object.__setattr__(out, "grid", self.grid)
        object.__setattr__(out, "values", values)
        object.__setattr__(out, "time", psi.time + steps * self.grid.dt)
        drift = abs(out.norm() - 1.0)
        if drift > NORM_DRIFT_TOL:
            raise NormDriftError(
                f"norm drift {drift:.3e} exceeds {NORM_DRIFT_TOL}; use a smaller dt"
            )
        return out


def evolve(psi: WaveFunction1D, barrier: DeltaBarrier | None, steps: int,
           hbar: float = 1.0, m: float = 1.0) -> WaveFunction1D:
    """Advance by steps * grid.dt under free motion plus the barrier."""
    return SplitStepEvolver(psi.grid, barrier, hbar=hbar, m=m).advance(psi, steps)


def evolve_history(psi: WaveFunction1D, barrier: DeltaBarrier | None, steps: int,
                   store_every: int, hbar: float = 1.0, m: float = 1.0) -> list[WaveFunction1D]:
    """Evolve while storing every store_every-th state (the initial one included)."""
    evolver = SplitStepEvolver(psi.grid, barrier, hbar=hbar, m=m)
    history = [psi]
    current = psi
    done = 0
    while done < steps:
        chunk = min(store_every, steps - done)
        current = evolver.advance(current, chunk)
        done += chunk
        history.append(current)
    return history
