"""Compile expression ASTs to a flat instruction tape.

The tape is what the numba backend interprets per point: rows of
(opcode, dst, a, b) over a float register file, with conditional jumps
implementing piecewise guards so only the selected branch is executed.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..expr.ast import Binary, Compare, Const, Piecewise, Unary, Var

OP_CONST = 0
OP_VAR = 1
OP_NEG = 2
OP_ABS = 3
OP_SIN = 4
OP_COS = 5
OP_SQRT = 6
OP_ADD = 7
OP_SUB = 8
OP_MUL = 9
OP_DIV = 10
OP_POW = 11
OP_MIN = 12
OP_MAX = 13
OP_SABS_POW = 14
OP_SPOW = 15
OP_LT = 16
OP_LE = 17
OP_GT = 18
OP_GE = 19
OP_EQ = 20
OP_NE = 21
OP_JMPZ = 22
OP_JMP = 23
OP_COPY = 24
OP_END = 25

_UNARY = {"neg": OP_NEG, "abs": OP_ABS, "sin": OP_SIN, "cos": OP_COS,
          "sqrt": OP_SQRT}
_BINARY = {"add": OP_ADD, "sub": OP_SUB, "mul": OP_MUL, "div": OP_DIV,
           "pow": OP_POW, "min": OP_MIN, "max": OP_MAX,
           "sabs_pow": OP_SABS_POW, "spow": OP_SPOW}
_COMPARE = {"lt": OP_LT, "le": OP_LE, "gt": OP_GT, "ge": OP_GE,
            "eq": OP_EQ, "ne": OP_NE}

# error codes shared with the backends
ERR_SQRT_NEGATIVE = 1
ERR_DIV_ZERO = 2
ERR_POW_NEGATIVE_BASE = 3
ERR_POW_ZERO_NEGATIVE = 4

ERROR_MESSAGES = {
    ERR_SQRT_NEGATIVE: ("sqrt", "negative argument"),
    ERR_DIV_ZERO: ("div", "division by zero"),
    ERR_POW_NEGATIVE_BASE: ("pow", "negative base with non-integer exponent"),
    ERR_POW_ZERO_NEGATIVE: ("pow", "zero base with negative exponent"),
}


class Tape:
    __slots__ = ("code", "consts", "n_regs", "result_reg")

    def __init__(self, code, consts, n_regs, result_reg):
        self.code = code
        self.consts = consts
        self.n_regs = n_regs
        self.result_reg = result_reg


class _Compiler:
    def __init__(self):
        self.code = []
        self.consts = []
        self.next_reg = 0

    def reg(self):
        r = self.next_reg
        self.next_reg += 1
        return r

    def emit(self, op, dst=0, a=0, b=0):
        self.code.append([op, dst, a, b])
        return len(self.code) - 1

    def const_index(self, value):
        self.consts.append(float(value))
        return len(self.consts) - 1

    def compile(self, e):
        if isinstance(e, Const):
            r = self.reg()
            self.emit(OP_CONST, r, self.const_index(e.value))
            return r
        if isinstance(e, Var):
            r = self.reg()
            self.emit(OP_VAR, r, e.index)
            return r
        if isinstance(e, Unary):
            a = self.compile(e.arg)
            r = self.reg()
            self.emit(_UNARY[e.op], r, a)
            return r
        if isinstance(e, Binary):
            a = self.compile(e.left)
            b = self.compile(e.right)
            r = self.reg()
            self.emit(_BINARY[e.op], r, a, b)
            return r
        if isinstance(e, Compare):
            a = self.compile(e.left)
            b = self.compile(e.right)
            r = self.reg()
            self.emit(_COMPARE[e.op], r, a, b)
            return r
        if isinstance(e, Piecewise):
            result = self.reg()
            end_jumps = []
            for pred, branch in e.cases:
                p = self.compile(pred)
                jz = self.emit(OP_JMPZ, 0, p, -1)
                b = self.compile(branch)
                self.emit(OP_COPY, result, b)
                end_jumps.append(self.emit(OP_JMP, 0, -1))
                self.code[jz][3] = len(self.code)  # guard false -> next case
            d = self.compile(e.default)
            self.emit(OP_COPY, result, d)
            for j in end_jumps:
                self.code[j][2] = len(self.code)
            return result
        raise TypeError(f"cannot compile node {e!r}")


@lru_cache(maxsize=512)
def compile_tape(e) -> Tape:
    c = _Compiler()
    result = c.compile(e)
    c.emit(OP_END, 0, result)
    code = np.asarray(c.code, dtype=np.int64)
    consts = np.asarray(c.consts if c.consts else [0.0], dtype=np.float64)
    return Tape(code, consts, c.next_reg, result)
