"""Collective-spin quantum annealing simulator.

Dense exact dynamics of N qubits restricted to the maximum angular momentum
sector: ramp spectra with parity-sector labels, closed Schrodinger evolution,
an eigenbasis-resolved dissipative master equation with an Ohmic bath, a GKSL
comparison channel, and a CSV experiment harness.
"""

from .closed_dynamics import (
    ClosedTrajectory,
    FullSpaceTrajectory,
    IntegrationError,
    IntegratorOptions,
    evolve_closed,
    evolve_full_space_oracle,
    fidelity,
    symmetric_embedding,
    total_pauli,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    FIGURE_IDS,
    ResultTable,
    parse_config,
    preset,
    run_experiment,
    run_figure,
    write_csv,
)
from .hamiltonians import (
    AnnealSchedule,
    LinearRamp,
    ProblemKind,
    anneal_hamiltonian,
    as_ramp,
    driver_transverse,
    nonstoquastic_xx,
    problem_ising,
    problem_xxz,
    schedule_derivative,
)
from .open_dynamics import (
    BohrDecomposition,
    DensityMatrix,
    GammaMode,
    NoiseSpec,
    OpenTrajectory,
    SpectralDensity,
    adiabatic_me_rhs,
    bohr_decomposition,
    collective_lowering,
    default_noise,
    evolve_adiabatic_me,
    evolve_gksl,
    gamma,
    ground_population,
)
from .spectrum import (
    SectorLabelError,
    SpectrumSnapshot,
    SpectrumSweep,
    adiabatic_metric,
    detect_ground_crossing,
    diagonalize,
    sweep_spectrum,
)
from .spin_algebra import (
    BasisMismatchError,
    CollectiveBasis,
    Operator,
    PureState,
    commutator,
    expectation,
    identity,
    lowest_eigenpair,
    m_eigenstate,
    magnetization_operator,
    parity_operator,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
