"""Numba evaluation backend: per-point interpretation of the compiled tape.

Importing this module requires numba; kernels/__init__ guards the import and
falls back to the numpy backend when unavailable.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..errors import DomainViolation
from . import tape as T


@njit(cache=True)
def _run(code, consts, pts, n_regs, out, err):  # pragma: no cover - jitted
    regs = np.empty(n_regs, dtype=np.float64)
    for i in range(pts.shape[0]):
        pc = 0
        while True:
            op = code[pc, 0]
            dst = code[pc, 1]
            a = code[pc, 2]
            b = code[pc, 3]
            if op == T.OP_CONST:
                regs[dst] = consts[a]
            elif op == T.OP_VAR:
                regs[dst] = pts[i, a]
            elif op == T.OP_NEG:
                regs[dst] = -regs[a]
            elif op == T.OP_ABS:
                regs[dst] = abs(regs[a])
            elif op == T.OP_SIN:
                regs[dst] = math.sin(regs[a])
            elif op == T.OP_COS:
                regs[dst] = math.cos(regs[a])
            elif op == T.OP_SQRT:
                v = regs[a]
                if v < 0.0:
                    err[i] = T.ERR_SQRT_NEGATIVE
                    out[i] = np.nan
                    break
                regs[dst] = math.sqrt(v)
            elif op == T.OP_ADD:
                regs[dst] = regs[a] + regs[b]
            elif op == T.OP_SUB:
                regs[dst] = regs[a] - regs[b]
            elif op == T.OP_MUL:
                regs[dst] = regs[a] * regs[b]
            elif op == T.OP_DIV:
                d = regs[b]
                if d == 0.0:
                    err[i] = T.ERR_DIV_ZERO
                    out[i] = np.nan
                    break
                regs[dst] = regs[a] / d
            elif op == T.OP_POW:
                base = regs[a]
                expo = regs[b]
                if base < 0.0 and expo != math.floor(expo):
                    err[i] = T.ERR_POW_NEGATIVE_BASE
                    out[i] = np.nan
                    break
                if base == 0.0 and expo < 0.0:
                    err[i] = T.ERR_POW_ZERO_NEGATIVE
                    out[i] = np.nan
                    break
                regs[dst] = base ** expo
            elif op == T.OP_MIN:
                regs[dst] = min(regs[a], regs[b])
            elif op == T.OP_MAX:
                regs[dst] = max(regs[a], regs[b])
            elif op == T.OP_SABS_POW:
                base = abs(regs[a])
                expo = regs[b]
                if base == 0.0 and expo < 0.0:
                    err[i] = T.ERR_POW_ZERO_NEGATIVE
                    out[i] = np.nan
                    break
                regs[dst] = base ** expo
            elif op == T.OP_SPOW:
                v = regs[a]
                expo = regs[b]
                base = abs(v)
                if base == 0.0 and expo < 0.0:
                    err[i] = T.ERR_POW_ZERO_NEGATIVE
                    out[i] = np.nan
                    break
                r = base ** expo
                regs[dst] = -r if v < 0.0 else (r if v > 0.0 else 0.0)
            elif op == T.OP_LT:
                regs[dst] = 1.0 if regs[a] < regs[b] else 0.0
            elif op == T.OP_LE:
                regs[dst] = 1.0 if regs[a] <= regs[b] else 0.0
            elif op == T.OP_GT:
                regs[dst] = 1.0 if regs[a] > regs[b] else 0.0
            elif op == T.OP_GE:
                regs[dst] = 1.0 if regs[a] >= regs[b] else 0.0
            elif op == T.OP_EQ:
                regs[dst] = 1.0 if regs[a] == regs[b] else 0.0
            elif op == T.OP_NE:
                regs[dst] = 1.0 if regs[a] != regs[b] else 0.0
            elif op == T.OP_JMPZ:
                if regs[a] == 0.0:
                    pc = b
                    continue
            elif op == T.OP_JMP:
                pc = a
                continue
            elif op == T.OP_COPY:
                regs[dst] = regs[a]
            else:  # OP_END
                out[i] = regs[a]
                break
            pc += 1


def evaluate_batch(e, pts: np.ndarray) -> np.ndarray:
    tp = T.compile_tape(e)
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    out = np.empty(pts.shape[0], dtype=np.float64)
    err = np.zeros(pts.shape[0], dtype=np.int64)
    _run(tp.code, tp.consts, pts, tp.n_regs, out, err)
    if err.any():
        code = int(err[err != 0][0])
        op, detail = T.ERROR_MESSAGES[code]
        raise DomainViolation(op, detail)
    return out
