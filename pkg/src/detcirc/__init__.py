"""Algebraic circuits over the integers.

Determinant circuits with division gates, the transformation passes that turn
them into balanced division-free circuits (division normalization, Taylor
coefficient extraction, homogenization, division elimination, depth
balancing), polynomial-identity proof generation and checking, and exact
brute-force oracles.
"""

from .circuit import (Circuit, CircuitBuilder, CircuitError, DegreeAnnotation,
                      decode, depth, disjoint_combine, encode, power_chain,
                      structurally_equal, substitute, to_dot)
from .evaluate import (SparsePoly, bareiss_det, char_poly_oracle, eval_int,
                       eval_rat, expand, expand_single, matrix_pow)

__all__ = [
    "Circuit", "CircuitBuilder", "CircuitError", "DegreeAnnotation",
    "decode", "depth", "disjoint_combine", "encode", "power_chain",
    "structurally_equal", "substitute", "to_dot",
    "SparsePoly", "bareiss_det", "char_poly_oracle", "eval_int", "eval_rat",
    "expand", "expand_single", "matrix_pow",
]

__version__ = "0.1.0"
