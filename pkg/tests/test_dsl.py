from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from henon_sibony.automorphism import verify_inverse
from henon_sibony.builtins import CUBIC_CYCLE_TEXT, product_text
from henon_sibony.dsl import (
    MapDefinition,
    ParseError,
    find,
    load,
    parse,
    parse_one,
    parse_polynomial,
    print_definition,
    print_definitions,
)
from henon_sibony.poly import I, Polynomial

from test_poly import polys

x, y, z = Polynomial.variables(3)


def test_cubic_cycle_with_inverse():
    d = parse_one(CUBIC_CYCLE_TEXT)
    assert d.name == "F" and d.variables == ("x", "y", "z")
    assert d.components == (y + x**2, z + y**2, x)
    F = d.to_polymap()
    assert verify_inverse(F, F.inverse)


def test_identity_k1():
    d = parse_one("map I(x) = (x)")
    assert d.components == (Polynomial.variable(1, 0),)
    assert d.inverse_components is None


def test_rational_henon():
    d = parse_one("map B(x,y) = (y, y^2 + 1/2 - x)")
    u, v = Polynomial.variables(2)
    assert d.components[1] == v**2 + Fraction(1, 2) - u
    assert print_definition(d) == "map B(x,y) = (y, y^2 - x + 1/2)"


def test_imaginary_unit():
    d = parse_one("map C(x,y) = (y + i*x^2, x)")
    u, v = Polynomial.variables(2)
    assert d.components[0] == v + I * u**2


@pytest.mark.parametrize(
    "text, expected",
    [
        ("-x^2", -(x**2)),
        ("2*x^2*y", 2 * x**2 * y),
        ("x - y - z", x - y - z),
        ("(x + y)^2", x**2 + 2 * x * y + y**2),
        ("-(x - z^2)^2", -((x - z**2) ** 2)),
        ("x*-y", -(x * y)),
        ("3/6*x", Fraction(1, 2) * x),
        ("x^0", Polynomial.one(3)),
    ],
)
def test_precedence(text, expected):
    assert parse_polynomial(text, ["x", "y", "z"]) == expected


def test_multiple_maps_and_comments():
    defs = parse("# two maps\n" + product_text(1) + "  # trailing\n")
    assert [d.name for d in defs] == ["PF", "PG"]
    assert find(defs, "PG").variables == ("x", "y", "z", "w")
    with pytest.raises(KeyError):
        find(defs, "nope")


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("map F(x) = (2x)", 1, 14),  # implicit multiplication
        ("map F(x) = (x^2^2)", 1, 16),  # chained power
        ("map F(x) = (y)", 1, 13),  # undeclared
        ("map F(x,y) = (x)", 1, 14),  # component count
        ("map F(x,x) = (x, x)", 1, 9),  # duplicate variable
        ("map F(i) = (i)", 1, 7),  # reserved name
        ("map F(x) = (x^y)", 1, 15),  # non-literal exponent
        ("map F(x) = (x^1/2)", 1, 15),  # rational exponent
        ("map F(x) = (x $ 1)", 1, 15),  # bad character
        ("map F(x) = (1/0)", 1, 13),  # zero denominator
        ("\n\nmap F(x) = (x", 3, 14),  # unexpected end
        ("mop F(x) = (x)", 1, 1),
    ],
)
def test_error_positions(text, line, column):
    with pytest.raises(ParseError) as info:
        parse(text)
    err = info.value
    assert (err.line, err.column) == (line, column)
    assert str(err).startswith(f"{line}:{column}: ")
    lines = text.split("\n")
    # every reported position lies inside the input (or just past its end)
    assert 1 <= err.line <= len(lines)
    assert 1 <= err.column <= len(lines[err.line - 1]) + 1


def test_zero_component_prints_zero():
    d = MapDefinition("Z", ("x",), (Polynomial.zero(1),))
    assert print_definition(d) == "map Z(x) = (0)"
    assert parse_one(print_definition(d)) == d


def test_roundtrip_cubic_cycle():
    d = parse_one(CUBIC_CYCLE_TEXT)
    printed = print_definition(d)
    assert parse_one(printed) == d
    assert print_definition(parse_one(printed)) == printed


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 3).flatmap(lambda k: st.tuples(st.just(k), st.lists(polys(k, 3, 4), min_size=k, max_size=k))))
def test_roundtrip_random(args):
    k, comps = args
    names = ("u", "v", "w")[:k]
    d = MapDefinition("R", names, tuple(comps), tuple(reversed(comps)))
    text = print_definition(d)
    assert parse_one(text) == d
    assert print_definition(parse_one(text)) == text


def test_print_then_parse_idempotent_on_accepted_text():
    text = "map G(a,b) = ((a+b)*(a-b), -b^2 + 1/3)  inverse=(a, b)"
    once = print_definition(parse_one(text))
    assert print_definition(parse_one(once)) == once


def test_load_file(tmp_path):
    p = tmp_path / "maps.map"
    p.write_text(CUBIC_CYCLE_TEXT + product_text(2), encoding="utf-8")
    defs = load(p)
    assert [d.name for d in defs] == ["F", "PF", "PG"]
    assert parse(print_definitions(defs)) == defs
