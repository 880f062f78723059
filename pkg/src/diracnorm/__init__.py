"""Pseudospectral solver for L2-normalized solitary waves of a nonlinear
Dirac equation on a periodic box."""

from .nonlinearity import (
    GrowthReport,
    NonlinearModel,
    WeightSpec,
    F_value,
    check_growth,
    f_prime,
    f_value,
    null_model,
    psi,
    psi_gradient,
    pure_power,
    two_power,
)
from .reduction import (
    DomainError,
    InnerConvergenceError,
    ReducedState,
    SmallnessError,
    energy,
    evaluate_reduced,
    h_map,
    inner_gradient,
    inner_maximize,
    kappa,
    pde_residual,
    reduce,
    reduced_gradient,
    reduced_value,
)
from .solver import (
    DescentStallError,
    MultiResult,
    SolutionRecord,
    SolverOptions,
    SweepResult,
    bifurcation_sweep,
    calibrate_a_max,
    default_initial_guess,
    extract_solution,
    minimize_on_sphere,
    multi_start_deflated,
)
from .spectral_core import (
    ALPHA,
    BETA,
    SIGMA,
    DiracSpace,
    DiracSymbol,
    Grid,
    SpectralSplit,
    SpinorField,
    apply_h0,
    dirac_symbol_at,
    e_inner,
    e_norm,
    h_half_norm,
    l2_inner,
    l2_norm,
    spectral_projectors,
    split,
)
from .subspaces import (
    HermiteBasis,
    LevelBoundResult,
    SubspaceReport,
    hermite_function,
    level_bound,
    mean_value,
    periodic_solution_phi,
    scaled_envelope_field,
    subspace_ratio,
)

__version__ = "0.1.0"
