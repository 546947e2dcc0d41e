"""Pointwise algebra of the traceless bisectional curvature operator on Kähler manifolds.

Curvature tensors at a point (metric = identity), their decomposition into
scalar, traceless Ricci and traceless 4-tensor parts, the matrix of the
operator on traceless real (1,1)-forms, its Lie-algebra square ``M#``, cone
predicates, and the reaction ODE of the Kähler-Ricci flow.
"""

from .basis import (
    FormBasis,
    OperatorMatrix,
    act,
    forward_map,
    matrix_full,
    matrix_traceless,
    reconstruct_s4,
    spectrum,
    standard_basis,
    trace_bound_check,
)
from .cones import cone_inequalities, cone_report, is_2_nonneg, is_nonneg, orth_bisec_min, ricci_pair_min, sup_ratio
from .curvature import (
    HermitianForm,
    InvariantError,
    KahlerCurvature,
    TracelessParts,
    decompose,
    recompose,
    ricci,
    scalar,
    space_form,
    unitary_conjugate,
    validate,
)
from .flow import (
    FlowState,
    MCConfig,
    Trajectory,
    integrate,
    montecarlo_cone,
    rhs_full,
    rhs_matrix,
    rhs_ric0,
    rhs_s4,
    rhs_scalar,
)
from .lie import StructureConstants, bracket, jacobi_residual, sharp, structure_constants
from .sampling import random_curvature, random_traceless_s4, random_unitaries

__all__ = [
    "FlowState",
    "FormBasis",
    "HermitianForm",
    "InvariantError",
    "KahlerCurvature",
    "MCConfig",
    "OperatorMatrix",
    "StructureConstants",
    "Trajectory",
    "TracelessParts",
    "act",
    "bracket",
    "cone_inequalities",
    "cone_report",
    "decompose",
    "forward_map",
    "integrate",
    "is_2_nonneg",
    "is_nonneg",
    "jacobi_residual",
    "matrix_full",
    "matrix_traceless",
    "montecarlo_cone",
    "orth_bisec_min",
    "random_curvature",
    "random_traceless_s4",
    "random_unitaries",
    "recompose",
    "reconstruct_s4",
    "rhs_full",
    "rhs_matrix",
    "rhs_ric0",
    "rhs_s4",
    "rhs_scalar",
    "ricci",
    "ricci_pair_min",
    "scalar",
    "sharp",
    "space_form",
    "spectrum",
    "standard_basis",
    "structure_constants",
    "sup_ratio",
    "trace_bound_check",
    "unitary_conjugate",
    "validate",
]
