"""Tiny polynomial-string parsing for the CLI (sympy-backed).

Accepts expressions like "X^2-3", "U^2-3-3^5", "(U^2-3)*(U-3)" in a single
variable (any name); returns ascending integer coefficient lists.
"""

from __future__ import annotations

from sympy import Poly, symbols
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from .errors import ConfigError

_TRANSFORMS = standard_transformations + (convert_xor,)


def parse_int_poly(text: str):
    """Ascending integer coefficients of a one-variable polynomial string."""
    try:
        expr = parse_expr(text, transformations=_TRANSFORMS)
    except Exception as exc:
        raise ConfigError(f"cannot parse polynomial {text!r}: {exc}") from exc
    free = sorted(expr.free_symbols, key=str)
    if len(free) > 1:
        raise ConfigError(f"expected one variable, got {free}")
    var = free[0] if free else symbols("X")
    try:
        poly = Poly(expr, var)
    except Exception as exc:
        raise ConfigError(f"{text!r} is not polynomial: {exc}") from exc
    coeffs = [int(c) for c in poly.all_coeffs()]
    return list(reversed(coeffs))
