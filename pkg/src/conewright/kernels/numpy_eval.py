"""Pure-numpy evaluation backend: vectorized recursive AST walk.

Piecewise branches are evaluated only on the rows their guard selects, so a
guarded branch never triggers domain errors at points where it is not taken
(matching the per-point jump semantics of the numba backend).
"""
from __future__ import annotations

import numpy as np

from ..errors import DomainViolation
from ..expr.ast import Binary, Compare, Const, Piecewise, Unary, Var


def _eval(e, rows):
    if isinstance(e, Const):
        return np.full(rows.shape[0], e.value, dtype=float)
    if isinstance(e, Var):
        return rows[:, e.index].astype(float, copy=False)
    if isinstance(e, Unary):
        a = _eval(e.arg, rows)
        if e.op == "neg":
            return -a
        if e.op == "abs":
            return np.abs(a)
        if e.op == "sin":
            return np.sin(a)
        if e.op == "cos":
            return np.cos(a)
        if e.op == "sqrt":
            if np.any(a < 0.0):
                raise DomainViolation("sqrt", "negative argument")
            return np.sqrt(a)
        raise ValueError(f"unknown unary op {e.op!r}")
    if isinstance(e, Binary):
        a = _eval(e.left, rows)
        b = _eval(e.right, rows)
        if e.op == "add":
            return a + b
        if e.op == "sub":
            return a - b
        if e.op == "mul":
            return a * b
        if e.op == "div":
            if np.any(b == 0.0):
                raise DomainViolation("div", "division by zero")
            return a / b
        if e.op == "pow":
            nonint = b != np.floor(b)
            if np.any((a < 0.0) & nonint):
                raise DomainViolation(
                    "pow", "negative base with non-integer exponent"
                )
            if np.any((a == 0.0) & (b < 0.0)):
                raise DomainViolation("pow", "zero base with negative exponent")
            return np.power(a, b)
        if e.op == "min":
            return np.minimum(a, b)
        if e.op == "max":
            return np.maximum(a, b)
        if e.op == "sabs_pow":
            if np.any((a == 0.0) & (b < 0.0)):
                raise DomainViolation("pow", "zero base with negative exponent")
            return np.power(np.abs(a), b)
        if e.op == "spow":
            if np.any((a == 0.0) & (b < 0.0)):
                raise DomainViolation("pow", "zero base with negative exponent")
            return np.sign(a) * np.power(np.abs(a), b)
        raise ValueError(f"unknown binary op {e.op!r}")
    if isinstance(e, Compare):
        a = _eval(e.left, rows)
        b = _eval(e.right, rows)
        if e.op == "lt":
            return (a < b).astype(float)
        if e.op == "le":
            return (a <= b).astype(float)
        if e.op == "gt":
            return (a > b).astype(float)
        if e.op == "ge":
            return (a >= b).astype(float)
        if e.op == "eq":
            return (a == b).astype(float)
        return (a != b).astype(float)
    if isinstance(e, Piecewise):
        m = rows.shape[0]
        out = np.empty(m, dtype=float)
        remaining = np.arange(m)
        for pred, branch in e.cases:
            if remaining.size == 0:
                break
            pv = _eval(pred, rows[remaining])
            hit = remaining[pv != 0.0]
            if hit.size:
                out[hit] = _eval(branch, rows[hit])
            remaining = remaining[pv == 0.0]
        if remaining.size:
            out[remaining] = _eval(e.default, rows[remaining])
        return out
    raise TypeError(f"cannot evaluate node {e!r}")


def evaluate_batch(e, pts: np.ndarray) -> np.ndarray:
    return _eval(e, pts)
