"""Initial-condition mini-language.

    spec := term { ("+" | "-") term }
    term := NUMBER | [NUMBER "*"] ("cos(" | "sin(") INT ["," NUMBER ["," NUMBER]] ")"

``cos(k, amp, phase)`` stands for amp * cos(2 pi k x + phase).  NUMBER is a
decimal literal with optional sign and exponent, or the token ``4pi2``
(4 pi^2).  Whitespace is ignored.  Errors carry the byte offset at which
the parser stopped.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .spectral import PeriodicGrid, RealField

_NUMBER = re.compile(r"4pi2|[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_INT = re.compile(r"\d+")
FOUR_PI_SQ = 4.0 * np.pi ** 2


@dataclass(frozen=True)
class Term:
    kind: str  # "const", "cos" or "sin"
    k: int = 0
    amp: float = 1.0
    phase: float = 0.0

    def render(self) -> str:
        if self.kind == "const":
            return repr(abs(self.amp))
        return f"{self.kind}({self.k}, {abs(self.amp)!r}, {self.phase!r})"

    def values(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "const":
            return np.full_like(x, self.amp)
        trig = np.cos if self.kind == "cos" else np.sin
        return self.amp * trig(2.0 * np.pi * self.k * x + self.phase)


@dataclass(frozen=True)
class InitSpec:
    source: str
    terms: tuple

    def render(self) -> str:
        parts = []
        for i, term in enumerate(self.terms):
            neg = np.signbit(term.amp)
            if i == 0:
                lead = ("-1*" if term.kind != "const" else "-") if neg else ""
                parts.append(lead + term.render())
            else:
                parts.append((" - " if neg else " + ") + term.render())
        return "".join(parts)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for term in self.terms:
            total = total + term.values(x)
        return total

    def field(self, grid: PeriodicGrid) -> RealField:
        return RealField(grid, self.evaluate(grid.x))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.data = text.encode("utf-8")
        self.pos = 0

    def fail(self, expected: str):
        found = self.data[self.pos:].decode("utf-8", "replace")[:1] or "end of input"
        raise ParseError(f"expected {expected}, found {found!r}", self.pos)

    def skip(self):
        while self.pos < len(self.data) and self.data[self.pos] in b" \t\r\n":
            self.pos += 1

    def peek(self, literal: str) -> bool:
        self.skip()
        return self.data.startswith(literal.encode(), self.pos)

    def expect(self, literal: str):
        if not self.peek(literal):
            self.fail(repr(literal))
        self.pos += len(literal)

    def _match(self, pattern):
        self.skip()
        # patterns are ASCII, so matching on the decoded tail keeps byte offsets
        tail = self.data[self.pos:].decode("ascii", "replace")
        return pattern.match(tail)

    def number(self) -> float:
        found = self._match(_NUMBER)
        if not found:
            self.fail("number")
        self.pos += found.end()
        token = found.group()
        return FOUR_PI_SQ if token == "4pi2" else float(token)

    def integer(self) -> int:
        found = self._match(_INT)
        if not found:
            self.fail("non-negative integer")
        self.pos += found.end()
        return int(found.group())

    def trig(self, scale: float) -> Term:
        kind = "cos" if self.peek("cos(") else "sin"
        self.expect(f"{kind}(")
        k = self.integer()
        amp, phase = 1.0, 0.0
        if self.peek(","):
            self.pos += 1
            amp = self.number()
            if self.peek(","):
                self.pos += 1
                phase = self.number()
        self.expect(")")
        return Term(kind, k, scale * amp, phase)

    def term(self, sign: float) -> Term:
        if self.peek("cos(") or self.peek("sin("):
            return self.trig(sign)
        value = self.number()
        if self.peek("*"):
            self.pos += 1
            if not (self.peek("cos(") or self.peek("sin(")):
                self.fail("'cos(' or 'sin('")
            return self.trig(sign * value)
        return Term("const", 0, sign * value, 0.0)

    def spec(self) -> InitSpec:
        terms = [self.term(1.0)]
        while True:
            self.skip()
            if self.pos >= len(self.data):
                break
            if self.peek("+"):
                sign = 1.0
            elif self.peek("-"):
                sign = -1.0
            else:
                self.fail("'+', '-' or end of input")
            self.pos += 1
            terms.append(self.term(sign))
        return InitSpec(self.text, tuple(terms))


def parse_init(text: str) -> InitSpec:
    """Parse ``text`` into an :class:`InitSpec`; raises ParseError."""
    return _Parser(text).spec()


def random_spec(rng, max_terms: int = 4) -> InitSpec:
    """Random well-formed spec, used by the round-trip checks."""
    terms = []
    for i in range(int(rng.integers(1, max_terms + 1))):
        kind = "const" if i == 0 and rng.random() < 0.5 else str(rng.choice(["cos", "sin"]))
        amp = float(np.round(rng.normal(), int(rng.integers(0, 6))))
        if kind == "const":
            terms.append(Term("const", 0, amp, 0.0))
        else:
            phase = float(np.round(rng.uniform(-3, 3), 3))
            terms.append(Term(kind, int(rng.integers(0, 9)), amp, phase))
    spec = InitSpec("", tuple(terms))
    return InitSpec(spec.render(), spec.terms)
