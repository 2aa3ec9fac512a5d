"""Beam-splitter scenarios: one packet per input gate, or their coherent
superpositions, scattering off the half-transmitting delta barrier.

Gate1/Gate2 send a packet toward the barrier from the left/right; Plus and
Minus are (gate1 +/- i*gate2)/sqrt(2).  With the calibrated barrier the
superpositions exit exclusively (Plus to the right, Minus to the left),
while each single-gate input splits 50/50.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .evolve import DeltaBarrier, calibrate_delta_barrier
from .fields import density
from .grid import Grid1D, WaveFunction1D, gaussian_packet, superpose
from .trajectories import TrajectoryEnsemble, integrate_trajectories

INPUTS = ("gate1", "gate2", "plus", "minus")


@dataclass(frozen=True)
class BeamSplitterParams:
    """Geometry and sampling parameters; defaults satisfy the 5% bandwidth cap."""

    # dt = 0.01 keeps the splitting error of the single-cell barrier kick
    # (phase V*dt per step) small enough that no high-k spray survives.
    grid: Grid1D = field(default_factory=lambda: Grid1D(-256.0, 256.0, 4096, 0.01))
    x0: float = 60.0
    sigma: float = 10.0
    k0: float = 1.0
    n_samples: int = 2000
    seed: int = 12345
    t_final: float | None = None  # None picks 2.2 * x0 / v0
    store_every: int = 50
    bins: int = 50
    hbar: float = 1.0
    m: float = 1.0
    barrier_strength: float | None = None  # None picks the half-transmitting g

    def __post_init__(self):
        sigma_k = 1.0 / (2.0 * self.sigma)
        if sigma_k / self.k0 > 0.05 + 1e-12:
            raise ValueError(
                f"bandwidth sigma_k/k0 = {sigma_k / self.k0:.3f} exceeds 0.05; widen sigma"
            )

    @property
    def speed(self) -> float:
        return self.hbar * self.k0 / self.m

    @property
    def run_time(self) -> float:
        return self.t_final if self.t_final is not None else 2.2 * self.x0 / self.speed

    def barrier(self) -> DeltaBarrier:
        if self.barrier_strength is not None:
            return DeltaBarrier(self.barrier_strength)
        return DeltaBarrier(calibrate_delta_barrier(self.k0, self.hbar, self.m))


@dataclass(frozen=True)
class ScenarioResult:
    input: str
    p3_wave: float
    p4_wave: float
    p3_traj: float
    p4_traj: float
    ensemble: TrajectoryEnsemble
    initial_wave: WaveFunction1D
    residual_center_mass: float


class PacketsNotClearedError(RuntimeError):
    """Too much density still near the barrier at the end of the run."""


def initial_state(kind: str, params: BeamSplitterParams) -> WaveFunction1D:
    grid = params.grid
    psi1 = gaussian_packet(grid, -params.x0, params.sigma, params.k0)
    psi2 = gaussian_packet(grid, params.x0, params.sigma, -params.k0)
    if kind == "gate1":
        return psi1
    if kind == "gate2":
        return psi2
    if kind == "plus":
        return superpose(psi1, psi2, 1 / np.sqrt(2), 1j / np.sqrt(2))
    if kind == "minus":
        return superpose(psi1, psi2, 1 / np.sqrt(2), -1j / np.sqrt(2))
    raise ValueError(f"unknown input {kind!r}; expected one of {INPUTS}")


def density_overlap(a: WaveFunction1D, b: WaveFunction1D) -> float:
    """Overlap mass integral of min(|a|^2, |b|^2)."""
    if a.grid != b.grid:
        raise ValueError("wavefunctions live on different grids")
    return float(np.sum(np.minimum(density(a), density(b))) * a.grid.dx)


def beam_splitter_scenario(kind: str, params: BeamSplitterParams) -> ScenarioResult:
    """Run one input through the splitter with wave and trajectory statistics."""
    psi0 = initial_state(kind, params)
    barrier = params.barrier()
    ensemble = integrate_trajectories(
        psi0, barrier, params.n_samples, params.seed, params.run_time,
        store_every=params.store_every, hbar=params.hbar, m=params.m,
    )
    psi_final = ensemble.final_wave
    x = params.grid.x
    rho = density(psi_final)
    dx = params.grid.dx

    # Exits are asymptotic regions; fail if the packets have not cleared.
    near = np.abs(x - barrier.position) < params.x0 / 4
    residual = float(np.sum(rho[near]) * dx)
    if residual > 1e-3:
        raise PacketsNotClearedError(
            f"{residual:.2e} of the density still within |x| < x0/4; run longer"
        )

    right = x > barrier.position
    p3_wave = float(np.sum(rho[right]) * dx)
    p4_wave = float(np.sum(rho[~right]) * dx)
    finals = ensemble.final_positions()
    p3_traj = float(np.mean(finals > barrier.position))
    return ScenarioResult(
        input=kind,
        p3_wave=p3_wave,
        p4_wave=p4_wave,
        p3_traj=p3_traj,
        p4_traj=1.0 - p3_traj,
        ensemble=ensemble,
        initial_wave=psi0,
        residual_center_mass=residual,
    )


def exit_classifier(barrier_position: float = 0.0):
    """Map a final position to its exit label ('3' right, '4' left)."""

    def outcome_of(x: float) -> str:
        return "3" if x > barrier_position else "4"

    return outcome_of


def run_beam_splitter_suite(params: BeamSplitterParams) -> dict:
    """All four inputs plus the cross-input overlap table and discrete model."""
    from ..ontomodel import make_bohmian_discrete_model, support_overlap

    results = {kind: beam_splitter_scenario(kind, params) for kind in INPUTS}
    overlaps = {}
    for i, a in enumerate(INPUTS):
        for b in INPUTS[i + 1:]:
            overlaps[f"{a},{b}"] = density_overlap(
                results[a].initial_wave, results[b].initial_wave
            )
    model = make_bohmian_discrete_model(
        {kind: results[kind].ensemble for kind in INPUTS},
        exit_classifier(params.barrier().position),
        bins=params.bins,
    )
    lam_overlap_pm, _ = support_overlap(model.epistemic["plus"], model.epistemic["minus"])
    lam_overlap_g12, _ = support_overlap(model.epistemic["gate1"], model.epistemic["gate2"])
    return {
        "results": results,
        "density_overlaps": overlaps,
        "model": model,
        "lambda_overlap_plus_minus": lam_overlap_pm,
        "lambda_overlap_gate1_gate2": lam_overlap_g12,
    }
