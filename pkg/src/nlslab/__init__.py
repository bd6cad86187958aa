"""Numerical laboratory for line standing waves on a line times a circle.

The pipeline mirrors the analysis it validates: an attractive well V(x)
holds a linear bound state; just above its eigenvalue a family of
stationary line profiles bifurcates; their linearization decides which
transverse torus harmonics grow; and at the critical period a
symmetry-breaking branch appears whose mass defect decides stability.

    spec = PotentialSpec.poschl_teller(2.0)
    grid = Grid1D(n=1024, half_width=20.0)
    gs = solve_ground_asymptotic(spec, 1.05, 3.0, grid)
    ts = spectrum_for_period(assemble(gs, spec), period=5.0)
"""

from .bifurcation import (
    PSTAR_LEADING,
    AuxProjections,
    BifurcationReport,
    BranchPoint,
    aux_projections,
    branch_continue,
    dlambda_domega,
    find_pstar,
    leading_coefficient,
    omega_pp0,
    omega_pp0_direct,
    r_coefficient,
    second_order_integral,
)
from .errors import (
    BlowupDetected,
    BranchLost,
    DimensionMismatch,
    ModeOutOfRange,
    ModelError,
    NlsLabError,
    NoBoundState,
    NonConvergence,
    SpectralAssumptionViolated,
    TrivialSolution,
)
from .evolve2d import (
    EvolutionState,
    EvolveConfig,
    GrowthExperiment,
    GrowthFit,
    Perturbation,
    RunRecord,
    evolve,
    growth_rate,
    initial_state,
    run_growth_experiment,
    seed_perturbed,
    step,
)
from .grid import (
    Field,
    Grid1D,
    Grid2D,
    apply_laplacian,
    apply_laplacian_fd,
    h1_norm,
    inner_product,
    l2_norm,
    project_mode,
    read_field,
    write_field,
)
from .groundstate import (
    GroundState,
    asymptotic_seed,
    continue_in_omega,
    d_omega_phi,
    solve_ground,
    solve_ground_asymptotic,
)
from .linearized import (
    OperatorAssembly,
    TransverseSpectrum,
    assemble,
    coercivity_check,
    critical_wavenumber,
    growth_curve,
    internal_mode,
    spectrum_for_period,
    transverse_growth,
    transverse_growth_direct,
)
from .potential import LinearGround, PotentialSpec, eval_potential, linear_ground

__version__ = "0.1.0"

__all__ = [
    "AuxProjections",
    "BifurcationReport",
    "BlowupDetected",
    "BranchLost",
    "BranchPoint",
    "DimensionMismatch",
    "EvolutionState",
    "EvolveConfig",
    "Field",
    "Grid1D",
    "Grid2D",
    "GroundState",
    "GrowthExperiment",
    "GrowthFit",
    "LinearGround",
    "ModeOutOfRange",
    "ModelError",
    "NlsLabError",
    "NoBoundState",
    "NonConvergence",
    "OperatorAssembly",
    "PSTAR_LEADING",
    "Perturbation",
    "PotentialSpec",
    "RunRecord",
    "SpectralAssumptionViolated",
    "TransverseSpectrum",
    "TrivialSolution",
    "apply_laplacian",
    "apply_laplacian_fd",
    "assemble",
    "asymptotic_seed",
    "aux_projections",
    "branch_continue",
    "coercivity_check",
    "continue_in_omega",
    "critical_wavenumber",
    "d_omega_phi",
    "dlambda_domega",
    "eval_potential",
    "evolve",
    "find_pstar",
    "growth_curve",
    "growth_rate",
    "h1_norm",
    "initial_state",
    "inner_product",
    "internal_mode",
    "l2_norm",
    "leading_coefficient",
    "linear_ground",
    "omega_pp0",
    "omega_pp0_direct",
    "project_mode",
    "r_coefficient",
    "read_field",
    "run_growth_experiment",
    "second_order_integral",
    "seed_perturbed",
    "solve_ground",
    "solve_ground_asymptotic",
    "spectrum_for_period",
    "step",
    "transverse_growth",
    "transverse_growth_direct",
    "write_field",
]
