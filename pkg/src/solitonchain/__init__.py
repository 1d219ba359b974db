"""Desk-scale simulator for entanglement generation and storage in defect spin chains."""

from .analytic import (
    analytic_eof_profile,
    effective_eta,
    mirroring_time,
    noisy_trimer_eigenvalues,
    trimer_eigensystem,
)
from .chain import (
    Basis,
    ChainSpec,
    HamiltonianMatrix,
    apply_diagonal_disorder,
    apply_offdiagonal_disorder,
    build_abc_chain,
    build_basis,
    build_hamiltonian,
    build_storage_chain,
    decouple_site,
)
from .disorder import (
    DisorderConfig,
    EnsembleStats,
    LevelStats,
    SpectrumStats,
    disordered_spec,
    ensemble_stats_csv,
    run_scenario1,
    run_scenario2,
    scenario_eof_values,
    spectrum_csv,
    spectrum_statistics,
)
from .dynamics import (
    BranchEnsemble,
    EigenDecomposition,
    InitialStateSpec,
    PureState,
    diagonalize,
    evolve,
    evolve_amplitudes,
    inject_plus,
    prepare_initial,
    requench,
)
from .entanglement import (
    ReductionPlan,
    TwoQubitDensity,
    concurrence,
    concurrence_many,
    eof,
    eof_from_concurrence,
    fidelity,
    reduce_to_two_sites,
)
from .errors import (
    BasisMismatchError,
    CapacityError,
    ConfigError,
    DomainError,
    NumericalError,
    ParameterError,
    SolitonChainError,
)
from .protocols import (
    LocalizedModeReport,
    ProtocolTrace,
    chain_mirroring_time,
    localized_mode_report,
    run_async_sweep,
    run_entangling,
    run_storage,
)
from .rng import SplitMix64, mix64

__version__ = "0.1.0"
