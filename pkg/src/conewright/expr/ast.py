"""AST node types for the expression DSL and the source serializer.

Nodes are frozen dataclasses, hence hashable and safe to share between
workers; everything downstream (evaluation tapes, derivative caches) keys
off node identity/equality.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

UNARY_OPS = ("neg", "abs", "sin", "cos", "sqrt")
BINARY_OPS = ("add", "sub", "mul", "div", "pow", "min", "max", "sabs_pow", "spow")
COMPARE_OPS = ("lt", "le", "gt", "ge", "eq", "ne")

# calls usable in source form: name -> (node op, arity)
CALL_FUNCTIONS = {
    "abs": ("abs", 1),
    "sin": ("sin", 1),
    "cos": ("cos", 1),
    "sqrt": ("sqrt", 1),
    "min": ("min", 2),
    "max": ("max", 2),
    "pow": ("pow", 2),
    "sabs_pow": ("sabs_pow", 2),
    "spow": ("spow", 2),
}

_CMP_SYMBOL = {"lt": "<", "le": "<=", "gt": ">", "ge": ">=", "eq": "==", "ne": "!="}


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Expression"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Piecewise:
    cases: tuple  # tuple of (Compare, Expression)
    default: "Expression"


Expression = Union[Const, Var, Unary, Binary, Piecewise]


def children(e):
    if isinstance(e, (Const, Var)):
        return ()
    if isinstance(e, Unary):
        return (e.arg,)
    if isinstance(e, (Binary, Compare)):
        return (e.left, e.right)
    if isinstance(e, Piecewise):
        out = []
        for pred, branch in e.cases:
            out.append(pred)
            out.append(branch)
        out.append(e.default)
        return tuple(out)
    raise TypeError(f"not an expression node: {e!r}")


@lru_cache(maxsize=4096)
def arity(e) -> int:
    """Declared arity: max variable index + 1 (0 for constant expressions)."""
    if isinstance(e, Var):
        return e.index + 1
    if isinstance(e, Const):
        return 0
    return max((arity(c) for c in children(e)), default=0)


def _num(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


# precedence levels used by the serializer
_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e) -> int:
    if isinstance(e, Const):
        return _PREC_ATOM if e.value >= 0 else _PREC_UNARY
    if isinstance(e, Var):
        return _PREC_ATOM
    if isinstance(e, Unary):
        return _PREC_UNARY if e.op == "neg" else _PREC_ATOM
    if isinstance(e, Binary):
        if e.op in ("add", "sub"):
            return _PREC_ADD
        if e.op in ("mul", "div"):
            return _PREC_MUL
        return _PREC_ATOM  # calls
    return _PREC_ATOM


def _wrap(e, parent_prec: int) -> str:
    s = to_source(e)
    if _prec(e) < parent_prec:
        return f"({s})"
    return s


def to_source(e) -> str:
    """Serialize to DSL source; parse(to_source(e)) is structurally equal to e."""
    if isinstance(e, Const):
        if e.value < 0:
            return f"-{_num(-e.value)}"
        return _num(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"-{_wrap(e.arg, _PREC_UNARY + 1)}"
        return f"{e.op}({to_source(e.arg)})"
    if isinstance(e, Binary):
        if e.op == "add":
            return f"{_wrap(e.left, _PREC_ADD)} + {_wrap(e.right, _PREC_ADD + 1)}"
        if e.op == "sub":
            return f"{_wrap(e.left, _PREC_ADD)} - {_wrap(e.right, _PREC_ADD + 1)}"
        if e.op == "mul":
            return f"{_wrap(e.left, _PREC_MUL)}*{_wrap(e.right, _PREC_MUL + 1)}"
        if e.op == "div":
            return f"{_wrap(e.left, _PREC_MUL)}/{_wrap(e.right, _PREC_MUL + 1)}"
        return f"{e.op}({to_source(e.left)}, {to_source(e.right)})"
    if isinstance(e, Compare):
        sym = _CMP_SYMBOL[e.op]
        return f"{to_source(e.left)} {sym} {to_source(e.right)}"
    if isinstance(e, Piecewise):
        parts = []
        for pred, branch in e.cases:
            parts.append(to_source(pred))
            parts.append(to_source(branch))
        parts.append(to_source(e.default))
        return f"piecewise({', '.join(parts)})"
    raise TypeError(f"not an expression node: {e!r}")


def count_nodes(e) -> int:
    return 1 + sum(count_nodes(c) for c in children(e))


def contains_op(e, ops) -> str | None:
    """Return the first op from `ops` appearing in e (or 'piecewise'), else None."""
    if isinstance(e, Piecewise) and "piecewise" in ops:
        return "piecewise"
    if isinstance(e, Unary) and e.op in ops:
        return e.op
    if isinstance(e, Binary) and e.op in ops:
        return e.op
    for c in children(e):
        found = contains_op(c, ops)
        if found is not None:
            return found
    return None
