"""Evaluate expression trees with exact derivatives and build patches from them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from ..errors import DomainError
from ..geometry import CurveJet, ParamCurve, SurfaceJet, SurfacePatch
from . import dual
from .ast import BinOp, Call, Const, Neg, Num, Var, to_source
from .dual import Dual2
from .parser import parse_expr

_CONST_VALUES = {"pi": math.pi, "e": math.e}
_UNARY = {
    "sin": dual.sin, "cos": dual.cos, "tan": dual.tan,
    "sinh": dual.sinh, "cosh": dual.cosh, "tanh": dual.tanh,
    "exp": dual.exp, "log": dual.log, "sqrt": dual.sqrt, "abs": dual.absolute,
}


def _domain_error(node, message):
    return DomainError(f"{message} in '{to_source(node)}'", node.pos)


def _finite(node, d: Dual2) -> Dual2:
    if not (np.all(np.isfinite(d.val)) and np.all(np.isfinite(d.grad))
            and np.all(np.isfinite(d.hess))):
        raise _domain_error(node, "non-finite result")
    return d


def _power(node, base: Dual2, expo: Dual2) -> Dual2:
    if expo.is_constant():
        k = expo.val.flat[0] if expo.val.size else 0.0
        if np.all(expo.val == k) and float(k).is_integer():
            if k < 0 and np.any(base.val == 0):
                raise _domain_error(node, "zero raised to a negative power")
            return base.ipow(int(k))
    if np.any(base.val <= 0):
        raise _domain_error(node, "non-positive base with non-integer exponent")
    return dual.exp(expo * dual.log(base))


def _evaluate(node, env: Dict[str, Dual2], nvars: int, shape) -> Dual2:
    if isinstance(node, Num):
        return Dual2.constant(node.value, nvars, shape)
    if isinstance(node, Const):
        return Dual2.constant(_CONST_VALUES[node.name], nvars, shape)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_evaluate(node.operand, env, nvars, shape)
    if isinstance(node, BinOp):
        a = _evaluate(node.left, env, nvars, shape)
        b = _evaluate(node.right, env, nvars, shape)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if np.any(b.val == 0):
                raise _domain_error(node, "division by zero")
            return _finite(node, a / b)
        return _finite(node, _power(node, a, b))
    if isinstance(node, Call):
        args = [_evaluate(a, env, nvars, shape) for a in node.args]
        if node.func == "atan2":
            y, x = args
            if np.any((y.val == 0) & (x.val == 0)):
                raise _domain_error(node, "atan2(0, 0)")
            return _finite(node, dual.atan2(y, x))
        (x,) = args
        if node.func == "log" and np.any(x.val <= 0):
            raise _domain_error(node, "log of non-positive value")
        if node.func == "sqrt" and np.any(x.val <= 0):
            raise _domain_error(node, "sqrt needs a positive argument")
        with np.errstate(all="ignore"):
            return _finite(node, _UNARY[node.func](x))
    raise TypeError(f"not an expression node: {node!r}")


def evaluate_dual(expr, bindings: Dict[str, object]) -> Dual2:
    """Evaluate ``expr`` with every bound name as an independent variable.

    Bound values may be arrays; they are broadcast together.
    """
    names = list(bindings)
    arrays = np.broadcast_arrays(*[np.asarray(bindings[k], dtype=float) for k in names]) \
        if names else []
    shape = arrays[0].shape if names else ()
    env = {k: Dual2.variable(a, i, len(names)) for i, (k, a) in enumerate(zip(names, arrays))}
    with np.errstate(all="ignore"):
        return _evaluate(expr, env, len(names), shape)


@dataclass(frozen=True)
class DualResult:
    value: float
    first_partials: Dict[str, float]
    second_partials: Dict[Tuple[str, str], float]


def eval_dual2(expr, bindings: Dict[str, float]) -> DualResult:
    """Value, first partials and second partials of ``expr`` at a point.

    ``second_partials`` is keyed by ordered name pairs and holds both
    ``(a, b)`` and ``(b, a)``.
    """
    d = evaluate_dual(expr, bindings)
    names = list(bindings)
    first = {k: float(d.grad[i]) for i, k in enumerate(names)}
    second = {(a, b): float(d.hess[i, j])
              for i, a in enumerate(names) for j, b in enumerate(names)}
    return DualResult(float(d.val), first, second)


# surfaces and curves ----------------------------------------------------------

@dataclass(frozen=True)
class ParsedSurface:
    """Three coordinate expressions in ``u, v`` over a parameter rectangle."""

    x: object
    y: object
    z: object
    domain: Tuple[Tuple[float, float], Tuple[float, float]]
    sources: Tuple[str, str, str] = field(default=("", "", ""), compare=False)

    def __post_init__(self):
        (u0, u1), (v0, v1) = self.domain
        if not (u1 > u0 and v1 > v0):
            raise ValueError(f"empty domain {self.domain}")
        center = {"u": 0.5 * (u0 + u1), "v": 0.5 * (v0 + v1)}
        for comp in (self.x, self.y, self.z):
            evaluate_dual(comp, center)


def parse_surface(x: str, y: str, z: str, domain) -> ParsedSurface:
    trees = [parse_expr(src, ("u", "v")) for src in (x, y, z)]
    return ParsedSurface(*trees, domain=tuple(map(tuple, domain)), sources=(x, y, z))


def compile_surface(parsed: ParsedSurface, name: str = "dsl") -> SurfacePatch:
    """Turn parsed coordinate expressions into a :class:`SurfacePatch`.

    Partials come from dual-number propagation, so they are exact to
    rounding. Domain errors surface when a point is evaluated.
    """
    comps = (parsed.x, parsed.y, parsed.z)

    def evaluator(u, v):
        ds = [evaluate_dual(c, {"u": u, "v": v}) for c in comps]
        stack = lambda f: np.stack([f(d) for d in ds], axis=-1)  # noqa: E731
        return SurfaceJet(
            P=stack(lambda d: d.val),
            Pu=stack(lambda d: d.grad[0]),
            Pv=stack(lambda d: d.grad[1]),
            Puu=stack(lambda d: d.hess[0, 0]),
            Puv=stack(lambda d: d.hess[0, 1]),
            Pvv=stack(lambda d: d.hess[1, 1]),
        )

    return SurfacePatch(evaluator, parsed.domain, name=name,
                        params={"x": parsed.sources[0], "y": parsed.sources[1],
                                "z": parsed.sources[2]})


@dataclass(frozen=True)
class ParsedCurve:
    """Parameter-domain curve ``t -> (u(t), v(t))``."""

    u: object
    v: object
    t_range: Tuple[float, float]
    sources: Tuple[str, str] = field(default=("", ""), compare=False)

    def __post_init__(self):
        t0, t1 = self.t_range
        if not t1 > t0:
            raise ValueError(f"empty t-range {self.t_range}")
        for comp in (self.u, self.v):
            evaluate_dual(comp, {"t": 0.5 * (t0 + t1)})


def parse_curve(u: str, v: str, t_range) -> ParsedCurve:
    return ParsedCurve(parse_expr(u, ("t",)), parse_expr(v, ("t",)), tuple(t_range), (u, v))


def compile_curve(parsed: ParsedCurve, name: str = "dsl") -> ParamCurve:
    def func(t):
        du = evaluate_dual(parsed.u, {"t": t})
        dv = evaluate_dual(parsed.v, {"t": t})
        return CurveJet(du.val, dv.val, du.grad[0], dv.grad[0], du.hess[0, 0], dv.hess[0, 0])

    return ParamCurve(func, parsed.t_range, name=name,
                      params={"u": parsed.sources[0], "v": parsed.sources[1]})


__all__ = [
    "DualResult", "ParsedCurve", "ParsedSurface", "compile_curve", "compile_surface",
    "eval_dual2", "evaluate_dual", "parse_curve", "parse_surface",
]
