"""Metric projection onto closed convex cones and order-isotonicity analysis."""

from .cones import (
    ConeFormatError,
    ConeSpec,
    DimensionMismatchError,
    Hyperplane,
    Lorentz,
    MonotoneNonneg,
    Orthant,
    PolyhedralH,
    PolyhedralV,
    SignedOrthant,
    Simplicial,
    UnsupportedConeError,
    cone_from_dict,
    cone_margin,
    cone_to_dict,
    dual,
    facet_normals,
    facets,
    generator_matrix,
    gram,
    is_proper,
    load_cone,
    membership,
    save_cone,
    sign_flip,
)
from .isotonic import (
    Certificate,
    ContainmentReport,
    Counterexample,
    FalsifierConfig,
    Obstruction,
    OrthantIsotoneReport,
    SamplingError,
    SubdualWitness,
    alternatives_check,
    certify_necessary,
    check_subdual,
    falsify,
    hyperplane_isotone,
    leq,
    orthant_isotone_recognize,
    sign_flip_search,
    sign_flip_search_gram,
    triple_obstruction,
    verify_certificate,
)
from .kernels import (
    IndeterminateError,
    LpResult,
    NnlsResult,
    SingularMatrixError,
    lp_feasible,
    nnls,
    solve_linear,
)
from .projections import (
    NonConvergenceError,
    ProjectionResult,
    boundary_ray_preimage_check,
    moreau,
    pava,
    project,
    project_hyperplane,
    project_oracle,
)

__version__ = "0.1.0"
