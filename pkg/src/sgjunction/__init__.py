"""Stationary sine-Gordon kinks on a Y-junction graph: closed-form
profiles, spectra and Morse indices of the linearized operators, and
direct nonlinear evolution with growth-rate measurement."""

__version__ = "0.1.0"

from .graph import (
    GraphField,
    JunctionType,
    Mesh,
    MeshMismatchError,
    VertexCoupling,
    YJunction,
    build_mesh,
    h1z_norm_sq,
    l2_inner,
    l2_norm,
    vertex_residuals,
)
from .profiles import (
    AntiKinkProfile,
    KinkProfile,
    ProfileKind,
    ProfileRangeError,
    eval_antikink,
    eval_kink,
    sample_profile,
    shape_fn,
    solve_antikink_shift,
    solve_kink_shift,
)
from .operators import (
    AssembledOperator,
    ResolventData,
    assemble_free,
    assemble_linearized,
    free_eigenpair,
    quadratic_form,
    resolvent_free_apply,
    theta_to_z,
)
from .spectra import (
    CertificationResult,
    SpectralReport,
    certify_criterion,
    essential_edge_scan,
    inertia,
    lowest_eigenpairs,
    shooting_eigenvalue,
    spectral_report,
)
from .dynamics import (
    EvolutionRecord,
    EvolveConfig,
    Formulation,
    SeedMode,
    State,
    acceleration,
    energy,
    evolve,
    growth_rate,
    relax_static,
    step_leapfrog,
)

__all__ = [
    "__version__",
    "GraphField", "JunctionType", "Mesh", "MeshMismatchError", "VertexCoupling",
    "YJunction", "build_mesh", "h1z_norm_sq", "l2_inner", "l2_norm", "vertex_residuals",
    "AntiKinkProfile", "KinkProfile", "ProfileKind", "ProfileRangeError",
    "eval_antikink", "eval_kink", "sample_profile", "shape_fn",
    "solve_antikink_shift", "solve_kink_shift",
    "AssembledOperator", "ResolventData", "assemble_free", "assemble_linearized",
    "free_eigenpair", "quadratic_form", "resolvent_free_apply", "theta_to_z",
    "CertificationResult", "SpectralReport", "certify_criterion", "essential_edge_scan",
    "inertia", "lowest_eigenpairs", "shooting_eigenvalue", "spectral_report",
    "EvolutionRecord", "EvolveConfig", "Formulation", "SeedMode", "State",
    "acceleration", "energy", "evolve", "growth_rate", "relax_static", "step_leapfrog",
]
