"""Exact (sigma_y, sigma_z)-summability and creative telescoping for
trivariate rational functions over Q(x)(y, z)."""

from .abramov import abramov_reduce_y, tau_decompose
from .bireduce import (
    BiReduceResult,
    Group,
    RemainderForm,
    RemainderFraction,
    bivariate_abramov,
    is_summable_yz,
    primary_reduce,
    validate_remainder_form,
)
from .cli import bench_instance, main, parse_expression
from .errors import (
    FactorizationError,
    InputError,
    OrderLimitError,
    ParseError,
    TrisumError,
)
from .linearize import combine_forms, linearize_remainder, shift_coprime_reduce
from .ratfun import (
    FactoredDen,
    factor_best_effort,
    factored_den_from_product,
    field_sum,
    sum_is_zero,
    x,
    y,
    z,
)
from .shifts import (
    integer_linear_type_yz,
    min_x_period,
    shift_equiv_xyz,
    shift_equiv_yz,
    shift_expr,
)
from .telescope import (
    Certificate,
    OreOp,
    TelescopeResult,
    existence_check,
    op_lclm,
    reduction_ct,
    telescope_by_lclm,
    verify_telescoper,
)

__version__ = "0.1.0"

__all__ = [
    "BiReduceResult", "Certificate", "FactoredDen", "FactorizationError",
    "Group", "InputError", "OrderLimitError", "OreOp", "ParseError",
    "RemainderForm", "RemainderFraction", "TelescopeResult", "TrisumError",
    "abramov_reduce_y", "bench_instance", "bivariate_abramov",
    "combine_forms", "existence_check", "factor_best_effort",
    "factored_den_from_product", "field_sum", "integer_linear_type_yz",
    "is_summable_yz", "linearize_remainder", "main", "min_x_period",
    "op_lclm", "parse_expression", "primary_reduce", "reduction_ct",
    "shift_coprime_reduce", "shift_equiv_xyz", "shift_equiv_yz",
    "shift_expr", "sum_is_zero", "tau_decompose", "telescope_by_lclm",
    "validate_remainder_form", "verify_telescoper", "x", "y", "z",
]
