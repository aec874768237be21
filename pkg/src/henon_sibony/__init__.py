"""Exact and numerical tools for polynomial automorphisms of C^k of
Hénon–Sibony type: regularity checks, affine symmetry groups, shared
iterates and Green functions."""

from .automorphism import (
    InverseMismatch,
    NotHenonSibony,
    PolyMap,
    RegularityReport,
    compose,
    identity,
    indeterminacy_forms,
    is_identity,
    iterate,
    projective_disjointness,
    regularity_report,
    verify_inverse,
)
from .builtins import cubic_cycle, henon, product_pair
from .dsl import MapDefinition, ParseError, parse, parse_one, parse_polynomial, print_definition
from .green import (
    GreenEstimate,
    GreenOptions,
    NotRegular,
    SliceSpec,
    green_minus,
    green_plus,
    green_plus_batch,
    invariance_residual,
    k_membership,
    raster_slice,
)
from .poly import Budget, BudgetExceeded, GaussianRational, Polynomial
from .symmetry import (
    Member,
    SolutionFamily,
    check_preserves_green,
    compute_N,
    conjugate,
    invert_affine,
    shared_iterate_search,
    verify_membership,
)

__version__ = "0.1.0"
