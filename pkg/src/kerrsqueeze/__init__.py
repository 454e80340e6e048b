"""Displacement-enhanced squeezing in a weak Kerr nonlinear oscillator.

Simulation and analysis toolkit: truncated Fock-space primitives, driven-Kerr
Hamiltonians, exact and Lindblad time evolution, the cyclic and Trotterized
squeezing protocols, phase-space analysis (Wigner functions, squeezing fits,
Fisher information, negativity, state reconstruction) and parameter sweeps.
"""

__version__ = "0.1.0"

from .errors import (
    AperiodicTraceError,
    ConfigError,
    DegeneratePhaseError,
    DimensionMismatchError,
    FitFailureError,
    IntegratorError,
    InvalidDimensionError,
    InvalidParameterError,
    KerrSqueezeError,
    TruncationFault,
    TruncationWarning,
    UnderDeterminedError,
)
from .fockcore import (
    DensityMatrix,
    OperatorMatrix,
    QuantumState,
    coherent_state,
    displacement_operator,
    expectation,
    fidelity,
    fock_state,
    ladder_operators,
    make_state,
    number_operator,
    squeeze_operator,
    squeezed_fock_state,
    suggest_dim_coherent,
    suggest_dim_squeezed,
)
from .hamiltonian import (
    DriveParams,
    FrameParams,
    JcParams,
    OscillatorParams,
    build_displaced_kerr,
    build_driven_kerr,
    build_jc,
    build_kpo,
)
from .evolve import (
    EvolutionResult,
    evolve_lindblad,
    evolve_unitary,
    trajectory,
)
from .protocol import (
    CyclicResult,
    ProtocolSchedule,
    TrotterConfig,
    TrotterResult,
    apply_virtual_rotation,
    build_cyclic_schedule,
    build_trotter_schedule,
    calibrate_phase,
    run_cyclic_squeeze,
    run_schedule,
    run_trotter_squeeze,
)
from .analysis import (
    GridSpec,
    SqueezeFit,
    WignerGrid,
    analytic_squeezed_fock_wigner,
    best_fit_squeezed_fock,
    best_fit_squeezed_vacuum,
    default_grid_spec,
    fisher_information,
    fit_1d_cuts,
    fit_2d_wigner,
    min_variance_xi,
    mle_reconstruct,
    squeezing_level_db,
    wigner,
    wigner_log_negativity,
    wigner_point_values,
)
from .sweep import (
    SweepRecord,
    extract_period,
    optimize_detuning,
    scan_decay,
    scan_drive_params,
    scan_qubit_excitation,
    scan_trotter_dt,
    squeeze_level_from_cuts,
)
