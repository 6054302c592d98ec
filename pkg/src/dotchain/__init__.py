"""Simulator of single-electron transfer in chains of CMOS quantum dots.

Solvers: sine-basis diagonalization of the stationary problem
(:mod:`dotchain.eigensolver`), FFT split-operator time evolution
(:mod:`dotchain.splitop`), a pulsed tight-binding lattice model
(:mod:`dotchain.tightbinding`) and telegraph-noise decoherence ensembles
(:mod:`dotchain.noise`), tied together by configuration-driven scenarios
(:mod:`dotchain.scenarios`).
"""

from .core import (
    Grid,
    UnitSystem,
    WaveState,
    convert,
    dot_probabilities,
    energy_expectation,
    norm,
)
from .potential import (
    BarrierSchedule,
    EmbeddedPotential,
    PiecewisePotential,
    SampledPotential,
    StepFunction,
    approximate_piecewise,
    embed_in_infinite_well,
    evaluate,
    load_potential_table,
    potential_on_grid,
    segment_dots,
)
from .eigensolver import (
    BasisSpec,
    EigenSolution,
    assemble_hamiltonian,
    hopping_from_splitting,
    localized_states,
    matrix_element_piecewise,
    matrix_element_sampled,
    reconstruct_wavefunction,
    solve_bound_states,
    tunneling_doublet,
)
from .splitop import (
    EvolutionTrace,
    PropagatorConfig,
    evolve,
    evolve_ensemble,
    ground_state_imaginary_time,
    som_step,
)
from .tightbinding import (
    AmplitudeTrace,
    Pulse,
    TBSchedule,
    gate_pulse_width,
    hamiltonian_at,
    hopping_at,
    propagate,
    rabi_period,
)
from .noise import (
    EnsembleTrace,
    TelegraphModel,
    ensemble_run,
    student_ci,
    telegraph_trajectory,
)

__version__ = "0.1.0"
