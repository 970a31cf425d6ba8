"""Self-similar solutions of viscous and viscous-capillary Riemann problems.

The package computes wave-fan profiles w(y), v(y) in the similarity
variable y = x/t by a fixed-point iteration built on normalized wave
measures, plus the surrounding machinery: boundary problems on a half
axis, generalized eigenstructure for non-identity diffusion matrices,
N-family decompositions, small-viscosity sweeps with wave classification,
and an independent time-dependent oracle.
"""

from .boundary import (
    BoundaryData,
    BoundarySolution,
    boundary_layer_check,
    solve_boundary,
)
from .constitutive import (
    GrowthReport,
    StressLaw,
    cubic_law,
    custom_law,
    growth_check,
    hardening_law,
    hyperbolic_region,
    linear_law,
    load_custom_law,
)
from .eigen import (
    DiffusionSystem,
    EigenPair,
    admissibility_check,
    generalized_eigen,
    generalized_speed,
    lax_equivalence,
    perturbation_scaling,
    standard_frames,
    two_by_two_closed_form,
)
from .errors import ConfigError, WavefanError
from .limits import (
    JumpRecord,
    analyze_jumps,
    classify_wave,
    concentration_diagnostics,
    delta_sequence,
    detect_jumps,
    epsilon_sweep,
    kinetic_sample,
    oscillation_count,
    profile_plot_script,
    rh_residuals,
    sum_rule_defect,
    summary_rows,
    sweep_from_solutions,
    sweep_plot_script,
    write_summary_csv,
)
from .measures import (
    ProfileGrid,
    WaveMeasure,
    build_phi_capillary,
    build_phi_viscous,
    capillary_error_estimator,
    envelope_check,
    locate_rho,
    make_grid,
    make_half_grid,
    viscous_exponent,
    wkb_exponent,
    wkb_mu,
)
from .nsystem import (
    FamilyDecomposition,
    assemble_sources,
    coupled_iteration,
    cross_mass,
    decompose,
    family_jumps,
    family_wave_measure,
    invert_family,
)
from .oracle import OracleResult, evolve, self_similar_compare
from .solver import (
    MiddleState,
    RiemannData,
    SelfSimilarSolution,
    SolverConfig,
    apply_T,
    auto_domain,
    delta0_cutoff,
    middle_state,
    ode_residual,
    reconstruct_v,
    solve_excised,
    solve_profile,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryData",
    "BoundarySolution",
    "ConfigError",
    "DiffusionSystem",
    "EigenPair",
    "FamilyDecomposition",
    "GrowthReport",
    "JumpRecord",
    "MiddleState",
    "OracleResult",
    "ProfileGrid",
    "RiemannData",
    "SelfSimilarSolution",
    "SolverConfig",
    "StressLaw",
    "WaveMeasure",
    "WavefanError",
    "admissibility_check",
    "analyze_jumps",
    "apply_T",
    "assemble_sources",
    "auto_domain",
    "boundary_layer_check",
    "build_phi_capillary",
    "build_phi_viscous",
    "capillary_error_estimator",
    "classify_wave",
    "concentration_diagnostics",
    "coupled_iteration",
    "cross_mass",
    "cubic_law",
    "custom_law",
    "decompose",
    "delta0_cutoff",
    "delta_sequence",
    "detect_jumps",
    "envelope_check",
    "epsilon_sweep",
    "evolve",
    "family_jumps",
    "family_wave_measure",
    "generalized_eigen",
    "generalized_speed",
    "growth_check",
    "hardening_law",
    "hyperbolic_region",
    "invert_family",
    "kinetic_sample",
    "lax_equivalence",
    "linear_law",
    "load_custom_law",
    "locate_rho",
    "make_grid",
    "make_half_grid",
    "middle_state",
    "ode_residual",
    "oscillation_count",
    "perturbation_scaling",
    "profile_plot_script",
    "reconstruct_v",
    "rh_residuals",
    "self_similar_compare",
    "solve_boundary",
    "solve_excised",
    "solve_profile",
    "standard_frames",
    "sum_rule_defect",
    "summary_rows",
    "sweep_from_solutions",
    "sweep_plot_script",
    "two_by_two_closed_form",
    "viscous_exponent",
    "wkb_exponent",
    "wkb_mu",
    "write_summary_csv",
]
