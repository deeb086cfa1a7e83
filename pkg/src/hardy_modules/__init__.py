"""Doubly commuting quotient modules of the Hardy space on the polydisc, as linear algebra.

Finite Blaschke products and their model spaces, tensor quotient modules of a
truncated ``H^2(D^n)``, their factorization into one-variable pieces, and the
Beurling-type description of co-doubly commuting submodules.
"""

__version__ = "0.1.0"

from .blaschke import BlaschkeProduct, ExtendedInner, match_zeros
from .config import (
    CheckFailure,
    DimensionLimitError,
    HardyError,
    InputError,
    RunConfig,
    dimension_limit,
)
from .factorization import (
    ClassificationError,
    Factorization,
    NotDoublyCommutingError,
    extract_factor,
    factorize,
    inflate,
)
from .linalg import ProjectionMatrix, orth_projection_onto_columns
from .model_space import (
    ModelSpace,
    build_model_space,
    full_space,
    project_one,
    recover_inner_from_shift,
    wandering_regeneration,
)
from .polydisc import (
    NotQuotientModuleError,
    PolydiscTruncation,
    QuotientModule,
    doubly_commuting_residual,
    hereditary_defect,
    raw_quotient,
    reducing_subspace_test,
    shift_matrix,
    tensor_module,
    tensor_quotient,
)
from .submodule import (
    CoDoublyCommutingSubmodule,
    beurling_roundtrip,
    build_submodule,
    commuting_projection_sum,
    quotient_of,
    truncation_deviation,
)

__all__ = [
    "BlaschkeProduct",
    "CheckFailure",
    "ClassificationError",
    "CoDoublyCommutingSubmodule",
    "DimensionLimitError",
    "ExtendedInner",
    "Factorization",
    "HardyError",
    "InputError",
    "ModelSpace",
    "NotDoublyCommutingError",
    "NotQuotientModuleError",
    "PolydiscTruncation",
    "ProjectionMatrix",
    "QuotientModule",
    "RunConfig",
    "beurling_roundtrip",
    "build_model_space",
    "build_submodule",
    "commuting_projection_sum",
    "dimension_limit",
    "doubly_commuting_residual",
    "extract_factor",
    "factorize",
    "full_space",
    "hereditary_defect",
    "inflate",
    "match_zeros",
    "orth_projection_onto_columns",
    "project_one",
    "quotient_of",
    "raw_quotient",
    "recover_inner_from_shift",
    "reducing_subspace_test",
    "shift_matrix",
    "tensor_module",
    "tensor_quotient",
    "truncation_deviation",
    "wandering_regeneration",
]
