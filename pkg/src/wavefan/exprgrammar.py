"""Tiny arithmetic grammar for system description files.

Matrix and flux entries are written as expressions in u1..uN with
+, -, *, /, ^ (right-associative power), parentheses, and numeric
constants. Parsed by hand into closures; nothing is ever eval()'d.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import ConfigError

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<var>u\d+)"
    r"|(?P<op>[-+*/^()]))"
)


def tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            rest = src[pos:].lstrip()
            if not rest:
                break
            raise ConfigError(f"expression {src!r}: cannot read {rest[:10]!r}")
        if m.group("num") is not None:
            tokens.append(("num", float(m.group("num"))))
        elif m.group("var") is not None:
            tokens.append(("var", int(m.group("var")[1:])))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    tokens.append(("end", None))
    return tokens


class Expr:
    """A compiled expression; call with the state vector u (0-based)."""

    def __init__(self, fn, n_vars: int, src: str):
        self._fn = fn
        self.n_vars = n_vars
        self.src = src

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return float(self._fn(u))

    def __repr__(self):
        return f"Expr({self.src!r})"


class _Parser:
    def __init__(self, tokens, n_vars, src):
        self.toks = tokens
        self.i = 0
        self.n_vars = n_vars
        self.src = src

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, what):
        raise ConfigError(f"expression {self.src!r}: {what}")

    # expr := term (('+'|'-') term)*
    def expr(self):
        f = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.take()[1]
            g = self.term()
            if op == "+":
                f = (lambda a, b: lambda u: a(u) + b(u))(f, g)
            else:
                f = (lambda a, b: lambda u: a(u) - b(u))(f, g)
        return f

    # term := factor (('*'|'/') factor)*
    def term(self):
        f = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.take()[1]
            g = self.unary()
            if op == "*":
                f = (lambda a, b: lambda u: a(u) * b(u))(f, g)
            else:
                f = (lambda a, b: lambda u: a(u) / b(u))(f, g)
        return f

    # unary := '-' unary | power
    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            g = self.unary()
            return (lambda a: lambda u: -a(u))(g)
        return self.power()

    # power := atom ('^' unary)?   (right-associative)
    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            expo = self.unary()
            return (lambda a, b: lambda u: a(u) ** b(u))(base, expo)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return (lambda c: lambda u: c)(val)
        if kind == "var":
            if not 1 <= val <= self.n_vars:
                self.fail(f"u{val} out of range (n={self.n_vars})")
            return (lambda k: lambda u: u[k])(val - 1)
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                self.fail("missing ')'")
            return inner
        self.fail(f"unexpected {val!r}" if val is not None else "unexpected end")


def parse_expression(src: str, n_vars: int) -> Expr:
    """Compile one expression in u1..u{n_vars}."""
    p = _Parser(tokenize(src), n_vars, src)
    fn = p.expr()
    if p.peek()[0] != "end":
        p.fail(f"trailing input from token {p.i}")
    return Expr(fn, n_vars, src)


def parse_matrix(entries, n: int, n_vars: int):
    """entries[(i, j)] = source string (1-based); returns u -> ndarray."""
    compiled = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if (i, j) not in entries:
                raise ConfigError(f"missing matrix entry ({i},{j})")
            compiled[(i, j)] = parse_expression(entries[(i, j)], n_vars)

    def matrix(u):
        out = np.empty((n, n))
        for (i, j), e in compiled.items():
            out[i - 1, j - 1] = e(u)
        return out

    return matrix


def parse_vector_field(sources, n_vars: int):
    """List of component sources; returns u -> ndarray and the exprs."""
    comps = [parse_expression(s, n_vars) for s in sources]

    def fieldfn(u):
        return np.array([c(u) for c in comps])

    return fieldfn, comps
