"""Recursive-descent parser for the expression DSL.

Grammar:

    expr    := term (("+"|"-") term)*
    term    := factor (("*"|"/") factor)*
    factor  := ("-")? atom ("^" number)?
    atom    := number | variable | call | "(" expr ")"
    call    := ident "(" arg ("," arg)* ")"
    variable := "x" digits

ident is one of abs, sin, cos, sqrt, min, max, pow, sabs_pow, spow,
piecewise.  Numbers are decimal literals (optionally with a fractional part
or exponent); rationals like 2/3 parse as a division of two constants with
identical value.  Inside a `piecewise(...)` call the guard arguments are
comparisons `expr (< | <= | > | >= | == | !=) expr`; comparisons are not
allowed anywhere else.
"""
from __future__ import annotations

from ..errors import ParseError
from .ast import (
    CALL_FUNCTIONS,
    Binary,
    Compare,
    Const,
    Expression,
    Piecewise,
    Unary,
    Var,
    arity,
)

_CMP_TOKENS = {"<": "lt", "<=": "le", ">": "gt", ">=": "ge", "==": "eq", "!=": "ne"}


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind!r}, {self.text!r})"


def _tokenize(source: str):
    tokens = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        start_col = col
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == ".":
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            tokens.append(_Token("number", text, line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], line, start_col))
            col += j - i
            i = j
            continue
        two = source[i : i + 2]
        if two in ("<=", ">=", "==", "!="):
            tokens.append(_Token("cmp", two, line, start_col))
            i += 2
            col += 2
            continue
        if ch in "<>":
            tokens.append(_Token("cmp", ch, line, start_col))
            i += 1
            col += 1
            continue
        if ch in "+-*/^(),":
            tokens.append(_Token(ch, ch, line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, start_col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"expected {kind!r}, found {tok.text!r}" if tok.kind != "eof"
                else f"expected {kind!r}, found end of input",
                tok.line,
                tok.col,
            )
        return self.next()

    def fail(self, message):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    def parse_expr(self):
        node = self.parse_term()
        while self.peek().kind in ("+", "-"):
            op = self.next().kind
            rhs = self.parse_term()
            node = Binary("add" if op == "+" else "sub", node, rhs)
        return node

    def parse_term(self):
        node = self.parse_factor()
        while self.peek().kind in ("*", "/"):
            op = self.next().kind
            rhs = self.parse_factor()
            node = Binary("mul" if op == "*" else "div", node, rhs)
        return node

    def parse_factor(self):
        if self.peek().kind == "-":
            self.next()
            inner = self.parse_factor_tail()
            return Unary("neg", inner)
        return self.parse_factor_tail()

    def parse_factor_tail(self):
        node = self.parse_atom()
        if self.peek().kind == "^":
            self.next()
            tok = self.expect("number")
            node = Binary("pow", node, Const(float(tok.text)))
        return node

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            return Const(float(tok.text))
        if tok.kind == "(":
            self.next()
            node = self.parse_expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            return self.parse_ident()
        self.fail(
            f"expected an expression, found {tok.text!r}" if tok.kind != "eof"
            else "expected an expression, found end of input"
        )

    def parse_ident(self):
        tok = self.next()
        name = tok.text
        if name.startswith("x") and name[1:].isdigit():
            return Var(int(name[1:]))
        if name == "piecewise":
            return self.parse_piecewise(tok)
        if name in CALL_FUNCTIONS:
            op, nargs = CALL_FUNCTIONS[name]
            self.expect("(")
            args = [self.parse_expr()]
            while self.peek().kind == ",":
                self.next()
                args.append(self.parse_expr())
            self.expect(")")
            if len(args) != nargs:
                raise ParseError(
                    f"{name} takes {nargs} argument(s), got {len(args)}",
                    tok.line,
                    tok.col,
                )
            if nargs == 1:
                return Unary(op, args[0])
            return Binary(op, args[0], args[1])
        raise ParseError(f"unknown identifier {name!r}", tok.line, tok.col)

    def parse_piecewise(self, tok):
        self.expect("(")
        args = [self.parse_guard_or_expr()]
        while self.peek().kind == ",":
            self.next()
            args.append(self.parse_guard_or_expr())
        self.expect(")")
        if len(args) < 3 or len(args) % 2 == 0:
            raise ParseError(
                "piecewise takes guard/branch pairs plus a default "
                f"(an odd number of arguments >= 3), got {len(args)}",
                tok.line,
                tok.col,
            )
        cases = []
        for k in range(0, len(args) - 1, 2):
            pred, branch = args[k], args[k + 1]
            if not isinstance(pred, Compare):
                raise ParseError(
                    f"piecewise guard {k // 2 + 1} must be a comparison",
                    tok.line,
                    tok.col,
                )
            if isinstance(branch, Compare):
                raise ParseError(
                    f"piecewise branch {k // 2 + 1} must not be a comparison",
                    tok.line,
                    tok.col,
                )
            cases.append((pred, branch))
        default = args[-1]
        if isinstance(default, Compare):
            raise ParseError(
                "piecewise default must not be a comparison", tok.line, tok.col
            )
        return Piecewise(tuple(cases), default)

    def parse_guard_or_expr(self):
        node = self.parse_expr()
        if self.peek().kind == "cmp":
            op = _CMP_TOKENS[self.next().text]
            rhs = self.parse_expr()
            return Compare(op, node, rhs)
        return node


def parse(source: str, declared_arity: int | None = None) -> Expression:
    """Parse DSL source into an AST.

    If `declared_arity` is given, the inferred arity (max variable index + 1)
    must match it exactly.
    """
    parser = _Parser(_tokenize(source))
    node = parser.parse_expr()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
    if declared_arity is not None and arity(node) != declared_arity:
        raise ParseError(
            f"arity mismatch: expression uses {arity(node)} variable(s), "
            f"declared {declared_arity}"
        )
    return node
