"""1D pilot-wave engine: unitary evolution, guidance trajectories,
field diagnostics and the beam-splitter scenarios."""

from .boxstates import box_eigenstate, box_energy, box_superposition
from .evolve import (
    DeltaBarrier,
    NormDriftError,
    SplitStepEvolver,
    calibrate_delta_barrier,
    delta_amplitudes,
    delta_transmission,
    evolve,
    evolve_history,
)
from .fields import (
    bohmian_energy,
    continuity_residual,
    density,
    local_phase,
    probability_current,
    velocity_field,
    velocity_field_weak_value,
)
from .grid import Grid1D, WaveFunction1D, gaussian_packet, superpose
from .sampling import sample_initial_positions
from .scenario import (
    INPUTS,
    BeamSplitterParams,
    PacketsNotClearedError,
    ScenarioResult,
    beam_splitter_scenario,
    density_overlap,
    exit_classifier,
    initial_state,
    run_beam_splitter_suite,
)
from .trajectories import TrajectoryEnsemble, integrate_trajectories

__all__ = [
    "BeamSplitterParams",
    "DeltaBarrier",
    "Grid1D",
    "INPUTS",
    "NormDriftError",
    "PacketsNotClearedError",
    "ScenarioResult",
    "SplitStepEvolver",
    "TrajectoryEnsemble",
    "WaveFunction1D",
    "beam_splitter_scenario",
    "bohmian_energy",
    "box_eigenstate",
    "box_energy",
    "box_superposition",
    "calibrate_delta_barrier",
    "continuity_residual",
    "delta_amplitudes",
    "delta_transmission",
    "density",
    "density_overlap",
    "evolve",
    "evolve_history",
    "exit_classifier",
    "gaussian_packet",
    "initial_state",
    "integrate_trajectories",
    "local_phase",
    "probability_current",
    "run_beam_splitter_suite",
    "sample_initial_positions",
    "superpose",
    "velocity_field",
    "velocity_field_weak_value",
]
