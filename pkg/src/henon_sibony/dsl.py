"""Text format for polynomial maps.

::

    # comments run to end of line
    map F(x,y,z) = (y + x^2, z + y^2, x) inverse = (z, x - z^2, y - (x - z^2)^2)

Expressions use ``+ - * ^``, parentheses, integer and rational literals
(``3``, ``1/2``) and the imaginary unit ``i``. ``^`` takes a non-negative
integer literal and binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.
Multiplication must be explicit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .automorphism import PolyMap
from .poly import I, GaussianRational, Polynomial


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int, token: str):
        super().__init__(f"{line}:{column}: {message} (at {token!r})")
        self.line = line
        self.column = column
        self.token = token


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, NUMBER, OP, EOF
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^(),=])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError("unexpected character", line, col, text[pos])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "number":
            if "/" in m.group() and int(m.group().split("/")[1]) == 0:
                raise ParseError("zero denominator", line, col, m.group())
            tokens.append(Token("NUMBER", m.group(), line, col))
        elif kind == "name":
            tokens.append(Token("NAME", m.group(), line, col))
        elif kind == "op":
            tokens.append(Token("OP", m.group(), line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


@dataclass(frozen=True, eq=False)
class MapDefinition:
    name: str
    variables: tuple[str, ...]
    components: tuple[Polynomial, ...]
    inverse_components: tuple[Polynomial, ...] | None = None

    def __eq__(self, other):
        if not isinstance(other, MapDefinition):
            return NotImplemented
        return (
            self.name == other.name
            and self.variables == other.variables
            and self.components == other.components
            and self.inverse_components == other.inverse_components
        )

    def __hash__(self):
        return hash((self.name, self.variables, self.components))

    def to_polymap(self) -> PolyMap:
        inverse = None
        if self.inverse_components is not None:
            inverse = PolyMap(self.inverse_components, names=self.variables)
        return PolyMap(self.components, inverse, self.variables, self.name)

    @classmethod
    def from_polymap(cls, F: PolyMap, name: str | None = None) -> "MapDefinition":
        inv = F.inverse.components if F.inverse is not None else None
        return cls(name or F.name or "F", tuple(F.variable_names()), F.components, inv)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.variables: dict[str, int] = {}

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.column, tok.text or "<end of input>")

    def advance(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind == "NUMBER":
            self.error(f"expected {text!r}")
        return self.advance()

    def expect_name(self) -> Token:
        if self.tok.kind != "NAME":
            self.error("expected a name")
        return self.advance()

    # definitions

    def definitions(self) -> list[MapDefinition]:
        out = []
        while self.tok.kind != "EOF":
            out.append(self.definition())
        return out

    def definition(self) -> MapDefinition:
        kw = self.tok
        if kw.kind != "NAME" or kw.text != "map":
            self.error("expected 'map'")
        self.advance()
        name = self.expect_name().text
        self.expect("(")
        variables: list[str] = []
        while True:
            v = self.expect_name()
            if v.text in ("i", "map", "inverse"):
                self.error(f"{v.text!r} is reserved and cannot name a variable", v)
            if v.text in variables:
                self.error("duplicate variable", v)
            variables.append(v.text)
            if self.tok.text == ",":
                self.advance()
                continue
            break
        self.expect(")")
        self.variables = {v: j for j, v in enumerate(variables)}
        self.expect("=")
        comps = self.tuple_of(len(variables), "components")
        inverse = None
        if self.tok.kind == "NAME" and self.tok.text == "inverse":
            self.advance()
            self.expect("=")
            inverse = tuple(self.tuple_of(len(variables), "inverse components"))
        return MapDefinition(name, tuple(variables), tuple(comps), inverse)

    def tuple_of(self, n: int, what: str) -> list[Polynomial]:
        start = self.expect("(")
        items = [self.expr()]
        while self.tok.text == ",":
            self.advance()
            items.append(self.expr())
        if len(items) != n:
            self.error(f"{len(items)} {what} for {n} variables", start)
        self.expect(")")
        return items

    # expressions: sum := term (('+'|'-') term)*

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def expr(self) -> Polynomial:
        acc = self.term()
        while self.tok.kind == "OP" and self.tok.text in "+-":
            op = self.advance().text
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> Polynomial:
        acc = self.unary()
        while self.tok.kind == "OP" and self.tok.text == "*":
            self.advance()
            acc = acc * self.unary()
        return acc

    def unary(self) -> Polynomial:
        if self.tok.kind == "OP" and self.tok.text == "-":
            self.advance()
            return -self.unary()
        if self.tok.kind == "OP" and self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.tok.kind == "OP" and self.tok.text == "^":
            self.advance()
            tok = self.tok
            if tok.kind != "NUMBER" or "/" in tok.text:
                self.error("exponent must be a non-negative integer literal")
            self.advance()
            base = base ** int(tok.text)
            if self.tok.kind == "OP" and self.tok.text == "^":
                self.error("chained '^' needs parentheses")
        return base

    def atom(self) -> Polynomial:
        tok = self.tok
        if tok.kind == "NUMBER":
            self.advance()
            if self.tok.kind in ("NAME", "NUMBER") or self.tok.text == "(":
                self.error("implicit multiplication is not allowed; use '*'")
            return Polynomial.constant(self.nvars, Fraction(tok.text))
        if tok.kind == "NAME":
            self.advance()
            if tok.text == "i":
                return Polynomial.constant(self.nvars, I)
            if tok.text not in self.variables:
                self.error("undeclared variable", tok)
            return Polynomial.variable(self.nvars, self.variables[tok.text])
        if tok.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        self.error("expected an expression")


def parse(text: str) -> list[MapDefinition]:
    """Parse every ``map`` declaration in ``text``."""
    return _Parser(tokenize(text)).definitions()


def parse_one(text: str) -> MapDefinition:
    defs = parse(text)
    if len(defs) != 1:
        raise ValueError(f"expected exactly one map, found {len(defs)}")
    return defs[0]


def parse_polynomial(text: str, variables: Sequence[str]) -> Polynomial:
    """Parse a bare expression over the given variable names."""
    p = _Parser(tokenize(text))
    for v in variables:
        if v == "i":
            raise ValueError("'i' is reserved for the imaginary unit")
    p.variables = {v: j for j, v in enumerate(variables)}
    out = p.expr()
    if p.tok.kind != "EOF":
        p.error("trailing input")
    return out


def find(defs: Sequence[MapDefinition], name: str) -> MapDefinition:
    for d in defs:
        if d.name == name:
            return d
    raise KeyError(f"no map named {name!r}")


def print_definition(d: MapDefinition) -> str:
    names = list(d.variables)
    body = ", ".join(c.to_string(names) for c in d.components)
    text = f"map {d.name}({','.join(names)}) = ({body})"
    if d.inverse_components is not None:
        inv = ", ".join(c.to_string(names) for c in d.inverse_components)
        text += f" inverse = ({inv})"
    return text


def print_definitions(defs: Sequence[MapDefinition]) -> str:
    return "\n".join(print_definition(d) for d in defs) + "\n"


def load(path) -> list[MapDefinition]:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


__all__ = [
    "GaussianRational",
    "MapDefinition",
    "ParseError",
    "find",
    "load",
    "parse",
    "parse_one",
    "parse_polynomial",
    "print_definition",
    "print_definitions",
    "tokenize",
]
