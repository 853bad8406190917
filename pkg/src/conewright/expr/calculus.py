"""Symbolic partial derivatives and light constant folding.

Differentiation only supports the symbolically smooth subset of the DSL:
abs/min/max/piecewise/sabs_pow/spow raise NonsmoothPrimitive, and pow
requires a constant-foldable exponent.
"""
from __future__ import annotations

import math

from ..errors import DifferentiationError, NonsmoothPrimitive
from .ast import Binary, Compare, Const, Expression, Piecewise, Unary, Var

_NONSMOOTH = ("abs", "min", "max", "sabs_pow", "spow", "piecewise")


def constant_value(e):
    """Value of a constant-foldable subtree, or None."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return None
    if isinstance(e, Unary):
        v = constant_value(e.arg)
        if v is None:
            return None
        if e.op == "neg":
            return -v
        if e.op == "abs":
            return abs(v)
        if e.op == "sin":
            return math.sin(v)
        if e.op == "cos":
            return math.cos(v)
        if e.op == "sqrt":
            return math.sqrt(v) if v >= 0 else None
        return None
    if isinstance(e, Binary):
        a, b = constant_value(e.left), constant_value(e.right)
        if a is None or b is None:
            return None
        if e.op == "add":
            return a + b
        if e.op == "sub":
            return a - b
        if e.op == "mul":
            return a * b
        if e.op == "div":
            return a / b if b != 0 else None
        if e.op == "pow":
            if a < 0 and b != int(b):
                return None
            if a == 0 and b < 0:
                return None
            return a ** b
        if e.op == "min":
            return min(a, b)
        if e.op == "max":
            return max(a, b)
        if e.op == "sabs_pow":
            return abs(a) ** b
        if e.op == "spow":
            return math.copysign(abs(a) ** b, a) if a != 0 else 0.0
    return None


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def simplify(e) -> Expression:
    """Fold constants and strip arithmetic identities (x+0, x*1, x*0, x^1)."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Unary):
        a = simplify(e.arg)
        node = Unary(e.op, a)
        v = constant_value(node)
        if v is not None:
            return Const(v)
        if e.op == "neg" and isinstance(a, Unary) and a.op == "neg":
            return a.arg
        return node
    if isinstance(e, Compare):
        return Compare(e.op, simplify(e.left), simplify(e.right))
    if isinstance(e, Piecewise):
        cases = tuple((simplify(p), simplify(b)) for p, b in e.cases)
        return Piecewise(cases, simplify(e.default))
    a, b = simplify(e.left), simplify(e.right)
    node = Binary(e.op, a, b)
    v = constant_value(node)
    if v is not None:
        return Const(v)
    if e.op == "add":
        if _is_const(a, 0.0):
            return b
        if _is_const(b, 0.0):
            return a
    elif e.op == "sub":
        if _is_const(b, 0.0):
            return a
        if _is_const(a, 0.0):
            return simplify(Unary("neg", b))
    elif e.op == "mul":
        if _is_const(a, 0.0) or _is_const(b, 0.0):
            return Const(0.0)
        if _is_const(a, 1.0):
            return b
        if _is_const(b, 1.0):
            return a
        if _is_const(a, -1.0):
            return simplify(Unary("neg", b))
        if _is_const(b, -1.0):
            return simplify(Unary("neg", a))
    elif e.op == "div":
        if _is_const(a, 0.0) and not _is_const(b, 0.0):
            return Const(0.0)
        if _is_const(b, 1.0):
            return a
    elif e.op == "pow":
        if _is_const(b, 1.0):
            return a
        if _is_const(b, 0.0):
            return Const(1.0)
    return node


def differentiate(e, i: int) -> Expression:
    """Exact symbolic partial derivative d e / d x_i, simplified."""
    return simplify(_diff(e, i))


def _diff(e, i):
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0 if e.index == i else 0.0)
    if isinstance(e, Piecewise):
        raise NonsmoothPrimitive("piecewise")
    if isinstance(e, Unary):
        if e.op in _NONSMOOTH:
            raise NonsmoothPrimitive(e.op)
        da = _diff(e.arg, i)
        if e.op == "neg":
            return Unary("neg", da)
        if e.op == "sin":
            return Binary("mul", Unary("cos", e.arg), da)
        if e.op == "cos":
            return Unary("neg", Binary("mul", Unary("sin", e.arg), da))
        if e.op == "sqrt":
            return Binary("div", da, Binary("mul", Const(2.0), Unary("sqrt", e.arg)))
        raise DifferentiationError(f"unsupported unary op {e.op!r}")
    if isinstance(e, Binary):
        if e.op in _NONSMOOTH:
            raise NonsmoothPrimitive(e.op)
        if e.op == "add":
            return Binary("add", _diff(e.left, i), _diff(e.right, i))
        if e.op == "sub":
            return Binary("sub", _diff(e.left, i), _diff(e.right, i))
        if e.op == "mul":
            return Binary(
                "add",
                Binary("mul", _diff(e.left, i), e.right),
                Binary("mul", e.left, _diff(e.right, i)),
            )
        if e.op == "div":
            num = Binary(
                "sub",
                Binary("mul", _diff(e.left, i), e.right),
                Binary("mul", e.left, _diff(e.right, i)),
            )
            return Binary("div", num, Binary("mul", e.right, e.right))
        if e.op == "pow":
            p = constant_value(e.right)
            if p is None:
                raise DifferentiationError(
                    "pow exponent must be a constant expression"
                )
            # d/dx u^p = p * u^(p-1) * u'
            return Binary(
                "mul",
                Binary(
                    "mul",
                    Const(p),
                    Binary("pow", e.left, Const(p - 1.0)),
                ),
                _diff(e.left, i),
            )
        raise DifferentiationError(f"unsupported binary op {e.op!r}")
    raise DifferentiationError(f"cannot differentiate node {e!r}")


def gradient(e, n: int | None = None):
    """All partials (d e / d x_0, ..., d e / d x_{n-1})."""
    from .ast import arity

    if n is None:
        n = arity(e)
    return tuple(differentiate(e, i) for i in range(max(n, 1)))
