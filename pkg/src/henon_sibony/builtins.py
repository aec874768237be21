"""Built-in maps used by the verification suite and the tests."""

from __future__ import annotations

from fractions import Fraction

from .automorphism import PolyMap
from .dsl import find, parse

CUBIC_CYCLE_TEXT = """\
map F(x,y,z) = (y + x^2, z + y^2, x) inverse = (z, x - z^2, y - (x - z^2)^2)
"""


def henon_text(c: Fraction | int = 1, name: str = "H") -> str:
    c = Fraction(c)
    return f"map {name}(x,y) = (y, y^2 + {c} - x) inverse = (x^2 + {c} - y, x)\n"


def product_text(c: Fraction | int = 1) -> str:
    """F = (h, h) and G = (h, h^-1) on C^4 for the Hénon map h."""
    c = Fraction(c)
    h = f"y, y^2 + {c} - x"
    h_on_zw = f"w, w^2 + {c} - z"
    hinv = f"x^2 + {c} - y, x"
    hinv_on_zw = f"z^2 + {c} - w, z"
    return (
        f"map PF(x,y,z,w) = ({h}, {h_on_zw}) inverse = ({hinv}, {hinv_on_zw})\n"
        f"map PG(x,y,z,w) = ({h}, {hinv_on_zw}) inverse = ({hinv}, {h_on_zw})\n"
    )


def cubic_cycle() -> PolyMap:
    """F(x,y,z) = (y + x^2, z + y^2, x) with its inverse."""
    return find(parse(CUBIC_CYCLE_TEXT), "F").to_polymap()


def henon(c: Fraction | int = 1) -> PolyMap:
    """h(x,y) = (y, y^2 + c - x) with inverse (x^2 + c - y, x)."""
    return find(parse(henon_text(c)), "H").to_polymap()


def product_pair(c: Fraction | int = 1) -> tuple[PolyMap, PolyMap]:
    defs = parse(product_text(c))
    return find(defs, "PF").to_polymap(), find(defs, "PG").to_polymap()
