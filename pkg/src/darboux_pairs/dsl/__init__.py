"""Arithmetic expression language for user-defined surfaces and curves."""

from .ast import to_source
from .compile import (
    DualResult,
    ParsedCurve,
    ParsedSurface,
    compile_curve,
    compile_surface,
    eval_dual2,
    evaluate_dual,
    parse_curve,
    parse_surface,
)
from .parser import MAX_DEPTH, parse_expr, tokenize

__all__ = [
    "DualResult", "MAX_DEPTH", "ParsedCurve", "ParsedSurface", "compile_curve",
    "compile_surface", "eval_dual2", "evaluate_dual", "parse_curve", "parse_expr",
    "parse_surface", "to_source", "tokenize",
]
