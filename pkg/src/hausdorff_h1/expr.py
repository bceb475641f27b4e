"""Tiny arithmetic expression language for kernels and automorphism families.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | NAME | NAME '(' args ')' | '(' expr ')' | '|' expr '|'

Unicode ``−``, ``×`` and ``÷`` are accepted, as is ``**`` for powers.
Expressions compile to vectorised callables over numpy arrays.

>>> f = compile_expression("1/|u|", ["u"])
>>> float(f({"u": -4.0}))
0.25
"""
import math
import re

import numpy as np

from .errors import ConfigError


def _step(x):
    return np.where(np.asarray(x) > 0.0, 1.0, 0.0)


def _reduce(fn):
    def apply(*args):
        if not args:
            raise ValueError("needs at least one argument")
        out = args[0]
        for a in args[1:]:
            out = fn(out, a)
        return out
    return apply


FUNCTIONS = {
    "abs": np.abs,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "floor": np.floor,
    "sign": np.sign,
    "step": _step,
    "min": _reduce(np.minimum),
    "max": _reduce(np.maximum),
}

CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)"
                    r"|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^(),|]))")


def tokenize(text):
    text = text.replace("−", "-").replace("×", "*").replace("÷", "/")
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ConfigError(f"unexpected character {text[pos:pos + 1]!r} in expression {text!r}")
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", float(num)))
        elif name is not None:
            tokens.append(("name", name))
        else:
            tokens.append(("op", "^" if op == "**" else op))
        pos = m.end()
    tokens.append(("end", None))
    return tokens


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.variables = set(variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op):
        tok = self.take()
        if tok != ("op", op):
            raise ConfigError(f"expected {op!r} in expression {self.text!r}")

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise ConfigError(f"trailing input in expression {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return ("^", base, self.unary())
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("const", val)
        if kind == "name":
            if self.peek() == ("op", "("):
                if val not in FUNCTIONS:
                    raise ConfigError(f"unknown function {val!r} in expression {self.text!r}")
                self.take()
                args = [self.expr()]
                while self.peek() == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                return ("call", val, args)
            if val in self.variables:
                return ("var", val)
            if val in CONSTANTS:
                return ("const", CONSTANTS[val])
            raise ConfigError(f"unknown name {val!r} in expression {self.text!r}")
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        if (kind, val) == ("op", "|"):
            node = self.expr()
            self.expect("|")
            return ("call", "abs", [node])
        raise ConfigError(f"unexpected token {val!r} in expression {self.text!r}")


def _build(node):
    tag = node[0]
    if tag == "const":
        value = node[1]
        return lambda env: value
    if tag == "var":
        name = node[1]
        return lambda env: env[name]
    if tag == "neg":
        inner = _build(node[1])
        return lambda env: -inner(env)
    if tag == "call":
        fn = FUNCTIONS[node[1]]
        args = [_build(a) for a in node[2]]
        return lambda env: fn(*(a(env) for a in args))
    left, right = _build(node[1]), _build(node[2])
    if tag == "+":
        return lambda env: left(env) + right(env)
    if tag == "-":
        return lambda env: left(env) - right(env)
    if tag == "*":
        return lambda env: left(env) * right(env)
    if tag == "/":
        return lambda env: np.true_divide(left(env), right(env))
    if tag == "^":
        return lambda env: np.power(np.asarray(left(env), dtype=float), right(env))
    raise AssertionError(tag)


def compile_expression(text, variables):
    """Compile ``text`` into ``f(env) -> array`` where ``env`` maps names to arrays."""
    if isinstance(text, (int, float)):
        value = float(text)
        return lambda env: value
    if not isinstance(text, str) or not text.strip():
        raise ConfigError(f"expression must be a non-empty string, got {text!r}")
    tree = _Parser(text, variables).parse()
    return _build(tree)


def coordinate_function(text, dim, prefix="u"):
    """Compile an expression over ``prefix1..prefixdim`` into ``f(points)``.

    ``points`` has shape (N, dim).  When ``dim == 1`` the bare name ``prefix``
    is an alias of ``prefix1``.  The result always has shape (N,).
    """
    names = [f"{prefix}{i + 1}" for i in range(dim)]
    allowed = names + ([prefix] if dim == 1 else [])
    fn = compile_expression(text, allowed)

    def evaluate(points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        env = {name: pts[:, i] for i, name in enumerate(names)}
        if dim == 1:
            env[prefix] = pts[:, 0]
        out = np.asarray(fn(env), dtype=float)
        return np.broadcast_to(out, (pts.shape[0],)).copy()

    evaluate.expression = text
    return evaluate
