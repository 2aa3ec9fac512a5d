"""Guidance-equation trajectory integration.

Samples are drawn from the initial density, then advanced with RK4 against
the velocity field held frozen over each wave time step.  The hot per-step
loop lives in qpilot._kernels (Cython when built, NumPy otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from .evolve import DeltaBarrier, NormDriftError, SplitStepEvolver, NORM_DRIFT_TOL
from .fields import EPS_RHO_FACTOR, density, probability_current
from .grid import WaveFunction1D
from .sampling import sample_initial_positions


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Bundle of Bohmian paths with their seeded initial samples."""

    seed: int
    initial_positions: np.ndarray
    times: np.ndarray
    paths: np.ndarray  # shape (n_samples, len(times))
    flags: np.ndarray  # samples that ever hit an undefined velocity region
    x_min: float
    x_max: float
    t_final: float
    final_wave: WaveFunction1D | None = None

    def final_positions(self) -> np.ndarray:
        return self.paths[:, -1]

    @property
    def n_samples(self) -> int:
        return self.paths.shape[0]


def _velocity_grid(values: np.ndarray, dx: float, hbar: float, m: float,
                   eps_rho_factor: float) -> tuple[np.ndarray, np.ndarray]:
    rho = np.abs(values) ** 2
    dpsi = np.gradient(values, dx)
    j = (hbar / m) * np.imag(np.conj(values) * dpsi)
    defined = (rho > eps_rho_factor * rho.max()).astype(np.uint8)
    v = np.where(defined != 0, j / np.where(rho > 0, rho, 1.0), 0.0)
    return np.ascontiguousarray(v), np.ascontiguousarray(defined)


def integrate_trajectories(
    psi0: WaveFunction1D,
    barrier: DeltaBarrier | None,
    n: int,
    seed: int,
    t_final: float,
    store_every: int = 10,
    substeps: int = 4,
    eps_rho_factor: float = EPS_RHO_FACTOR,
    hbar: float = 1.0,
    m: float = 1.0,
) -> TrajectoryEnsemble:
    """Co-evolve the wave and n guidance trajectories up to t_final."""
    grid = psi0.grid
    steps = int(round(t_final / grid.dt))
    if steps < 1:
        raise ValueError("t_final shorter than one time step")

    x = np.ascontiguousarray(sample_initial_positions(psi0, n, seed))
    initial = x.copy()
    last_v = np.zeros(n)
    flags = np.zeros(n, dtype=np.uint8)

    evolver = SplitStepEvolver(grid, barrier, hbar=hbar, m=m)
    values = psi0.values
    times = [psi0.time]
    snapshots = [x.copy()]

    # The velocity field is frozen over one wave step; composite RK4
    # sub-steps resolve the stiff variation near the barrier and nodes.
    sub_dt = grid.dt / substeps
    for step in range(steps):
        v_grid, defined = _velocity_grid(values, grid.dx, hbar, m, eps_rho_factor)
        for _ in range(substeps):
            _kernels.advance_samples(x, last_v, flags, v_grid, defined,
                                     grid.x_min, grid.dx, sub_dt)
        values = evolver.step_values(values)
        if (step + 1) % store_every == 0 or step + 1 == steps:
            times.append(psi0.time + (step + 1) * grid.dt)
            snapshots.append(x.copy())

    norm = float(np.sqrt(np.sum(np.abs(values) ** 2) * grid.dx))
    if abs(norm - 1.0) > NORM_DRIFT_TOL:
        raise NormDriftError(f"norm drift {abs(norm - 1.0):.3e}; use a smaller dt")

    t_end = psi0.time + steps * grid.dt
    return TrajectoryEnsemble(
        seed=seed,
        initial_positions=initial,
        times=np.array(times),
        paths=np.column_stack(snapshots),
        flags=flags,
        x_min=grid.x_min,
        x_max=grid.x_max,
        t_final=t_end,
        final_wave=WaveFunction1D(grid, values, time=t_end),
    )
