"""Backend dispatch for the hot numeric kernels.

Two interchangeable implementations exist for expression evaluation and the
pairwise quotient scan:

* ``numba`` — tape interpreter / pair scan compiled with ``@njit`` (default
  when numba imports successfully);
* ``numpy`` — pure-numpy vectorized fallback.

``CONEWRIGHT_BACKEND=numpy`` (or ``numba``) in the environment forces a
backend; ``set_backend()`` does the same in-process (tests and the benchmark
use it). Both backends are deterministic; they may differ from each other by
last-ulp rounding in transcendentals.
"""
from __future__ import annotations

import os

import numpy as np

from ..errors import EvaluationError
from ..expr.ast import arity
from . import numpy_eval, pairwise

ENV_VAR = "CONEWRIGHT_BACKEND"

try:
    from . import numba_eval

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba_eval = None
    HAVE_NUMBA = False

_override: str | None = None


def set_backend(name: str | None) -> None:
    """Force a backend in-process (None restores env/auto selection)."""
    global _override
    if name is not None and name not in ("numpy", "numba"):
        raise ValueError(f"unknown backend {name!r}")
    _override = name


def active_backend() -> str:
    name = _override or os.environ.get(ENV_VAR, "").strip().lower() or None
    if name is None:
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in ("numpy", "numba"):
        raise EvaluationError(f"unknown backend {name!r} in ${ENV_VAR}")
    if name == "numba" and not HAVE_NUMBA:
        raise EvaluationError("backend 'numba' requested but numba is not importable")
    return name


def evaluate_batch(e, pts, backend: str | None = None) -> np.ndarray:
    """Evaluate expression e at every row of pts ((m, n) or (m,) for n=1)."""
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    need = arity(e)
    if pts.shape[1] < max(need, 1):
        raise EvaluationError(
            f"points have dimension {pts.shape[1]}, expression needs {need}"
        )
    name = backend or active_backend()
    if name == "numba":
        return numba_eval.evaluate_batch(e, pts)
    return numpy_eval.evaluate_batch(e, pts)


def evaluate(e, x, backend: str | None = None) -> float:
    """Evaluate at a single point (scalar or vector)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(evaluate_batch(e, x[None, :], backend=backend)[0])


def max_pair_quotient(pts, vals, backend: str | None = None) -> float:
    return pairwise.max_pair_quotient(pts, vals, backend or active_backend())


def warmup() -> str:
    """Force JIT compilation of the active backend's kernels (no-op for numpy)."""
    from ..expr.parser import parse

    e = parse("piecewise(x0 != 0, x0*sin(1/x0), 0) + sabs_pow(x0, 2/3)")
    evaluate_batch(e, np.array([[0.5], [0.0], [-0.5]]))
    max_pair_quotient(np.array([[0.0], [1.0]]), np.array([0.0, 1.0]))
    return active_backend()
