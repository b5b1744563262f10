"""Reader and canonical printer for polynomial system files.

File format::

    vars: x, y, z;
    dim: 2;
    x^4 + y^4 + z^4 - 3;

Statements end with ``;``. Coefficients are decimal literals, optionally
suffixed by ``i`` (``2.5i``); a bare ``i`` is the imaginary unit. Operators
are ``+ - * ^`` (``**`` is accepted for ``^``) and parentheses. ``#`` starts a
comment that runs to the end of the line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

from .poly import Poly, PolySystem


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


@dataclass
class Token:
    kind: str  # num, imag, ident, op, end
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*^();:,])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        if m.group("ws") is not None:
            chunk = m.group("ws")
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rfind("\n") + 1
        elif m.group("num") is not None:
            kind = "imag" if m.group("imag") else "num"
            tokens.append(Token(kind, m.group("num"), line, col))
        elif m.group("ident") is not None:
            tokens.append(Token("ident", m.group("ident"), line, col))
        else:
            op = m.group("op")
            tokens.append(Token("op", "^" if op == "**" else op, line, col))
        pos = m.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


class _ExprParser:
    def __init__(self, tokens: list[Token], var_index: dict[str, int]):
        self.toks = tokens
        self.pos = 0
        self.var_index = var_index
        self.n = len(var_index)

    def peek(self) -> Token:
        return self.toks[self.pos]

    def take(self) -> Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.take()
        if tok.kind != "op" or tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return tok

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in ops

    def expr(self) -> Poly:
        p = self.term()
        while self.at_op("+", "-"):
            op = self.take().text
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Poly:
        p = self.unary()
        while self.at_op("*"):
            self.take()
            p = p * self.unary()
        return p

    def unary(self) -> Poly:
        if self.at_op("-"):
            self.take()
            return -self.unary()
        if self.at_op("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        if self.at_op("^"):
            self.take()
            tok = self.take()
            if tok.kind != "num" or not tok.text.isdigit():
                raise ParseError("exponent must be a non-negative integer literal", tok.line, tok.col)
            base = base ** int(tok.text)
        return base

    def _literal(self, tok: Token) -> float:
        value = float(tok.text)
        if not math.isfinite(value):
            raise ParseError(f"non-finite literal {tok.text}", tok.line, tok.col)
        return value

    def atom(self) -> Poly:
        tok = self.take()
        if tok.kind == "num":
            return Poly.constant(self.n, self._literal(tok))
        if tok.kind == "imag":
            return Poly.constant(self.n, 1j * self._literal(tok))
        if tok.kind == "ident":
            if tok.text == "i":
                return Poly.constant(self.n, 1j)
            if tok.text not in self.var_index:
                raise ParseError(f"unknown variable {tok.text!r}", tok.line, tok.col)
            return Poly.variable(self.n, self.var_index[tok.text])
        if tok.kind == "op" and tok.text == "(":
            p = self.expr()
            self.expect(")")
            return p
        raise ParseError(f"unexpected {tok.text or 'end of input'!r}", tok.line, tok.col)


def parse_poly(text: str, vars: Sequence[str]) -> Poly:
    """Parse a single polynomial expression over ``vars``."""
    parser = _ExprParser(tokenize(text), {v: i for i, v in enumerate(vars)})
    p = parser.expr()
    tok = parser.peek()
    if tok.kind != "end":
        raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col)
    return p


def _statements(text: str) -> list[list[Token]]:
    """Split the token stream on ``;``; each statement gets its own end token."""
    toks = tokenize(text)
    out, cur = [], []
    for tok in toks:
        if tok.kind == "op" and tok.text == ";":
            if cur:
                out.append(cur + [Token("end", "", tok.line, tok.col)])
            cur = []
        elif tok.kind == "end":
            if cur:
                raise ParseError("statement not terminated by ';'", cur[0].line, cur[0].col)
        else:
            cur.append(tok)
    return out


def parse_system(text: str) -> PolySystem:
    """Parse a system file (header ``vars:``, ``dim:`` then polynomials)."""
    statements = _statements(text)
    if len(statements) < 2:
        raise ParseError("expected 'vars:' and 'dim:' headers", 1, 1)
    toks, dim_toks, *poly_stmts = statements

    if not (toks[0].kind == "ident" and toks[0].text == "vars" and toks[1].text == ":"):
        raise ParseError("expected 'vars:' header", toks[0].line, toks[0].col)
    names = []
    expect_name = True
    for tok in toks[2:-1]:
        if expect_name:
            if tok.kind != "ident" or tok.text == "i":
                raise ParseError(f"invalid variable name {tok.text!r}", tok.line, tok.col)
            if tok.text in names:
                raise ParseError(f"duplicate variable {tok.text!r}", tok.line, tok.col)
            names.append(tok.text)
        elif tok.text != ",":
            raise ParseError("expected ',' between variable names", tok.line, tok.col)
        expect_name = not expect_name
    if not names or expect_name:
        raise ParseError("malformed variable list", toks[0].line, toks[0].col)

    toks = dim_toks
    if not (
        len(toks) == 4
        and toks[0].text == "dim"
        and toks[1].text == ":"
        and toks[2].kind == "num"
        and toks[2].text.isdigit()
    ):
        raise ParseError("expected 'dim: <integer>'", toks[0].line, toks[0].col)
    dim = int(toks[2].text)
    if not 0 <= dim < len(names):
        raise ParseError(f"dim must lie in [0, {len(names) - 1}]", toks[2].line, toks[2].col)

    index = {v: i for i, v in enumerate(names)}
    polys = []
    for stmt in poly_stmts:
        parser = _ExprParser(stmt, index)
        p = parser.expr()
        tok = parser.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col)
        polys.append(p)
    if not polys:
        raise ParseError("no polynomials given", toks[0].line, toks[0].col)
    return PolySystem(names, polys, dim)


def _format_coef(c: complex) -> tuple[str, str]:
    """Return (sign, magnitude text) for a coefficient."""
    if c.imag == 0.0:
        re_ = c.real
        return ("-" if re_ < 0 else "+"), repr(abs(re_))
    im = c.imag
    imag_txt = f"{'-' if im < 0 else '+'}{repr(abs(im))}i"
    return "+", f"({repr(c.real)}{imag_txt})"


def format_poly(p: Poly, vars: Sequence[str]) -> str:
    """Canonical text: graded-lex term order, exact float round-trip."""
    if p.is_zero():
        return "0"
    parts = []
    for exp, c in p.items():
        mono = "*".join(
            v if k == 1 else f"{v}^{k}" for v, k in zip(vars, exp) if k
        )
        sign, mag = _format_coef(c)
        if mono and mag == "1.0":
            body = mono
        elif mono:
            body = f"{mag}*{mono}"
        else:
            body = mag
        if not parts:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)


def format_system(system: PolySystem) -> str:
    lines = [f"vars: {', '.join(system.vars)};", f"dim: {system.declared_dim};"]
    lines += [format_poly(p, system.vars) + ";" for p in system.polys]
    return "\n".join(lines) + "\n"
