"""Cohomology of Lie superalgebras of vector fields, computed exactly.

The pipeline: build a grade slice of an algebra (``algebras``), assemble
the cochain complex over it (``cochains``), and reduce grade by grade with
exact linear algebra (``linalg``, ``cohomology``).  ``cli`` wraps it in a
job-file driven command line tool.
"""

from .algebras import (AlgebraSlice, CustomAlgebra, Family, OutOfRangeError, UsageError,
                       build_slice, enumerate_basis, find_internal_grading_element,
                       parse_custom_table, verify_algebra)
from .cochains import (ADJOINT, COADJOINT, TRIVIAL, TRIVIAL_MODULE, Cochain, CochainKey, ModuleSpec,
                       WindowError, apply_differential, canonicalize, cochain_basis,
                       differential_matrix, module_action, parse_cochain, wedge)
from .cohomology import (CohomologyResult, alternative_forms, class_match, compute_cohomology,
                         is_coboundary, is_cocycle, scan, slice_for)
from .linalg import ExactMatrix, InternalConsistencyError, quotient_basis
from .scalars import QQ, PrimeField, field_from_spec
from .superpoly import SuperPolynomial, VariableContext, parse_poly

__all__ = [
    "ADJOINT", "COADJOINT", "TRIVIAL", "TRIVIAL_MODULE", "QQ",
    "AlgebraSlice", "Cochain", "CochainKey", "CohomologyResult", "CustomAlgebra", "ExactMatrix",
    "Family", "InternalConsistencyError", "ModuleSpec", "OutOfRangeError", "PrimeField",
    "SuperPolynomial", "UsageError", "VariableContext", "WindowError",
    "alternative_forms", "apply_differential", "build_slice", "canonicalize", "class_match",
    "cochain_basis", "compute_cohomology", "differential_matrix", "enumerate_basis",
    "field_from_spec", "find_internal_grading_element", "is_coboundary", "is_cocycle",
    "module_action", "parse_cochain", "parse_custom_table", "parse_poly", "quotient_basis",
    "scan", "slice_for", "verify_algebra", "wedge",
]
