"""Hybrid Liouvillians, exceptional points, and postselected quantum trajectories.

The package builds the generators of small open quantum systems (full
Lindblad, no-jump, and the q-weighted hybrid interpolation between them),
analyzes their spectra including exceptional-point location and Jordan
chains, and validates the postselection interpretation of the hybrid
dynamics by Monte Carlo quantum-jump simulation.
"""

__version__ = "0.1.0"

from .evolve import EvolutionResult, TraceUnderflowError, expectation, propagate
from .lindblad import (
    IDENTITY_2,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    JumpChannel,
    LindbladModel,
    QubitStateSpec,
    Superoperator,
    dissipator_superop,
    effective_hamiltonian,
    hybrid_liouvillian,
    liouvillian,
    nojump_superop,
    qubit_state,
)
from .models import (
    ClosedFormSpectrum,
    Example1Params,
    Example2Params,
    example1_ep,
    example1_generalized_eigenmatrix,
    example1_hybrid_spectrum,
    example1_model,
    example2_hybrid_ep,
    example2_hybrid_spectrum,
    example2_lep_generalized_eigenmatrix,
    example2_liouvillian_spectrum,
    example2_model,
    example2_nhh_generalized_eigenvector,
    example2_nhh_spectrum,
    model_from_json,
    preset_model,
)
from .numerics import (
    EigenConvergenceError,
    EigenResult,
    MinNormSolution,
    eigendecompose,
    expm,
    kron,
    min_norm_solve,
    unvec,
    vec,
)
from .spectra import (
    BranchTrack,
    EpEstimate,
    JordanChainResult,
    MatrixOperator,
    SpectralDecomposition,
    SteadyStateError,
    decompose,
    jordan_block_size,
    jordan_chain,
    locate_ep,
    nhh_operator,
    steady_state,
    sweep,
)
from .trajectories import (
    EnsembleStats,
    InefficientDetector,
    TrajectoryConfig,
    TrajectoryRecord,
    TwoDetector,
    build_effective_channels,
    ensemble_average,
    postselect_inefficient,
    postselect_two_detector,
    run_ensemble,
    step,
)
from .verify import VerificationReport, run_verification
