"""Preset ring expressions.

Grammar::

    atom := S<n> | S^<n> | S1 | CP2 | CP2bar | T<n> | S2xS2
    expr := atom | prod(expr, expr) | connsum(expr, expr) | connsum^<k>(expr)

Whitespace between tokens is ignored.
"""

from __future__ import annotations

import re

from .errors import DimensionError, PresetParseError, RingValidationError
from .ring import (
    GradedRing,
    connected_sum_power,
    make_circle,
    make_connected_sum,
    make_cp2,
    make_product,
    make_sphere,
    make_torus,
)

_ATOM = re.compile(r"S2xS2|CP2bar|CP2|S\^?(\d+)|T(\d+)")
_INT = re.compile(r"\d+")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message, pos=None):
        raise PresetParseError(message, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def eat(self, literal: str) -> bool:
        self.skip()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str):
        if not self.eat(literal):
            self.fail(f"expected {literal!r}")

    def integer(self) -> int:
        self.skip()
        m = _INT.match(self.text, self.pos)
        if not m:
            self.fail("expected an integer")
        self.pos = m.end()
        return int(m.group())

    def expr(self) -> GradedRing:
        self.skip()
        start = self.pos
        if self.eat("prod"):
            self.expect("(")
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return make_product(a, b)
        if self.eat("connsum"):
            if self.eat("^"):
                k_pos = self.pos
                k = self.integer()
                if k < 1:
                    self.fail("connected-sum power must be at least 1", k_pos)
                self.expect("(")
                a = self.expr()
                self.expect(")")
                return connected_sum_power(a, k)
            self.expect("(")
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            if a.n != b.n:
                self.fail(f"connected sum of dimensions {a.n} and {b.n}", start)
            return make_connected_sum(a, b)
        return self.atom()

    def atom(self) -> GradedRing:
        start = self.pos
        m = _ATOM.match(self.text, self.pos)
        if not m:
            self.fail("expected a manifold name or prod/connsum")
        self.pos = m.end()
        word = m.group()
        try:
            if word == "S2xS2":
                return make_product(make_sphere(2), make_sphere(2))
            if word == "CP2":
                return make_cp2()
            if word == "CP2bar":
                return make_cp2(-1)
            if m.group(1) is not None:
                n = int(m.group(1))
                return make_circle() if n == 1 else make_sphere(n)
            n = int(m.group(2))
            if n < 1:
                raise DimensionError("torus dimension must be at least 1")
            return make_torus(n) if n > 1 else make_circle()
        except (DimensionError, RingValidationError) as exc:
            self.fail(str(exc), start)


def parse_preset(expr: str) -> GradedRing:
    """Build a ring from a preset expression; the expression becomes its name."""
    p = _Parser(expr)
    ring = p.expr()
    p.skip()
    if p.pos != len(expr):
        p.fail("unexpected trailing input")
    return ring.renamed(expr.replace(" ", ""))
