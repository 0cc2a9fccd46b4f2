"""Function reconstruction from weighted edge moments on polygonal meshes."""
from .orthopoly import (
    RecurrenceCoeffs,
    WeightError,
    WeightSpec,
    build_recurrence,
    endpoint_values,
    evaluate,
    monomial_coeffs,
    rescaled_eval,
    roots,
)
from .quadrature import QuadRule, gauss, gegenbauer_lobatto, lobatto_endpoint_weight
from .unisolvence import (
    PredicateBundle,
    Reason,
    UnisolvenceQuery,
    Verdict,
    check_even_weight,
    check_general,
    check_jacobi,
    predicate_bundle,
)
from .boundary import (
    BoundarySpace,
    BoundaryTriple,
    EnrichedTriple,
    Polygon,
    StateNotDegenerate,
    annihilator,
    boundary_triple,
    enrich,
    enriched_gram,
    enrichment_F,
    gram,
    moment_functional,
)
from .mesh import Mesh, cartesian, friedrichs_keller
from .reconstruct import (
    DegenerateConfiguration,
    ElementSpec,
    ErrorReport,
    Geometry,
    Reconstruction,
    SingularElementError,
    convergence_study,
    l1_error,
    local_dofs,
    local_solve,
    reconstruct_mesh,
)
from .functions import TEST_FUNCTIONS

__version__ = "0.1.0"
