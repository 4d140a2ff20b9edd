"""Spectral analysis toolkit for Hanoi attractors.

Builds finite meshes of the attractor, assembles the renormalized Dirichlet
energy and the two-part reference measure, solves the Neumann/Dirichlet
Laplacian eigenproblems, and fits the eigenvalue-counting asymptotics.
"""

from .geometry import (
    Mesh,
    Segment,
    Vertex,
    build_level_sets,
    build_mesh,
    check_alpha,
    contract,
    corner_count,
    dump_mesh,
    hausdorff_dimension,
    holder_exponent,
    node_count,
    segment_count,
    segment_length,
)
from .forms import (
    EnergyForm,
    RenormFactors,
    assemble_energy,
    dump_form,
    effective_resistance,
    harmonic_extension,
    renorm_factors,
    trace_to_boundary,
)
from .measure import (
    MassVector,
    assemble_mass,
    beta_bound,
    continuous_normalizer,
    default_beta,
    dump_mass,
    geometric_ratio,
    validate_beta,
)
from .spectral import (
    COUNTING_EXPONENT,
    DIRICHLET,
    NEUMANN,
    SPECTRAL_DIMENSION,
    EigenProblem,
    FitReport,
    SolverError,
    Spectrum,
    WeylReport,
    counting_function,
    dump_counting_samples,
    dump_spectrum,
    edge_mode_spectrum,
    generalized_eigenvalues,
    solve_spectrum,
    spectral_dim_fit,
    weyl_bracket_check,
)

__version__ = "0.1.0"

__all__ = [
    "Mesh", "Segment", "Vertex",
    "build_level_sets", "build_mesh", "check_alpha", "contract",
    "corner_count", "dump_mesh", "hausdorff_dimension", "holder_exponent",
    "node_count", "segment_count", "segment_length",
    "EnergyForm", "RenormFactors", "assemble_energy", "dump_form",
    "effective_resistance", "harmonic_extension", "renorm_factors",
    "trace_to_boundary",
    "MassVector", "assemble_mass", "beta_bound", "continuous_normalizer",
    "default_beta", "dump_mass", "geometric_ratio", "validate_beta",
    "COUNTING_EXPONENT", "DIRICHLET", "NEUMANN", "SPECTRAL_DIMENSION",
    "EigenProblem", "FitReport", "SolverError", "Spectrum", "WeylReport",
    "counting_function", "dump_counting_samples", "dump_spectrum",
    "edge_mode_spectrum", "generalized_eigenvalues", "solve_spectrum",
    "spectral_dim_fit", "weyl_bracket_check",
]
