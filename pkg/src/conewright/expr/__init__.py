"""Expression DSL: parsing, evaluation, symbolic differentiation, domains."""
from .ast import (
    Binary,
    Compare,
    Const,
    Expression,
    Piecewise,
    Unary,
    Var,
    arity,
    to_source,
)
from .calculus import differentiate, gradient, simplify
from .domain import Box, Disk, domain_from_json
from .lipschitz import lipschitz_estimate
from .parser import parse

def evaluate(e, x, backend=None):
    from .. import kernels

    return kernels.evaluate(e, x, backend=backend)


def evaluate_batch(e, pts, backend=None):
    from .. import kernels

    return kernels.evaluate_batch(e, pts, backend=backend)

__all__ = [
    "Binary", "Compare", "Const", "Expression", "Piecewise", "Unary", "Var",
    "arity", "to_source", "parse", "differentiate", "gradient", "simplify",
    "Box", "Disk", "domain_from_json", "lipschitz_estimate",
    "evaluate", "evaluate_batch",
]
