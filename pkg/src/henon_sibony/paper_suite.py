"""Built-in reproduction checks: the cubic-cycle map of C^3 and the product
maps over a Hénon map of C^2."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .automorphism import (
    PolyMap,
    compose,
    identity,
    indeterminacy_forms,
    iterate,
    projective_disjointness,
    regularity_report,
)
from .builtins import cubic_cycle, product_pair
from .dsl import parse_polynomial
from .poly import Polynomial
from .symmetry import (
    MonicRelation,
    PowerRelation,
    compute_N,
    conjugate,
    cyclotomic,
    generic_affine,
    indeterminacy_mask,
    reduce_map,
    shared_iterate_search,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


def diagonal_map(entries: list[Polynomial]) -> PolyMap:
    """diag(entries) as a map in k variables plus the entries' parameter block."""
    k = len(entries)
    m = entries[0].nvars
    xs = Polynomial.variables(k + m)
    return PolyMap(tuple(e.lift(k + m, k) * xs[i] for i, e in enumerate(entries)), nparams=m)


def symbolic_root_member(exponents=(1, 2, 4), power: int = 1) -> PolyMap:
    """diag(a^(power*e) for e in exponents) with symbolic a, a^7 = 1."""
    a = Polynomial.variable(1, 0)
    return diagonal_map([a ** (power * e) for e in exponents])


def noncommutation_formula(a_power: int = 1) -> PolyMap:
    """(a^-2 (x^2 + y), a^3 (z + y^2), a^-1 x) at a -> a^a_power, with a^-1 = a^6."""
    xs = Polynomial.variables(4)
    x, y, z, a = xs
    s = a_power
    return PolyMap(
        (a ** (5 * s) * (x**2 + y), a ** (3 * s) * (z + y**2), a ** (6 * s) * x), nparams=1
    )


def conjugate_by(beta: PolyMap, beta_inv: PolyMap, F: PolyMap, relations) -> PolyMap:
    """β ∘ F ∘ β^-1 reduced by ``relations``."""
    return reduce_map(compose(beta, compose(F, beta_inv)), relations)


def _check(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, reported verbatim
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, ok, detail)


def check_inverse() -> tuple[bool, str]:
    F = cubic_cycle()
    a = compose(F, F.inverse)
    b = compose(F.inverse, F)
    return a == identity(3) and b == identity(3), f"F∘F^-1 = {a}, F^-1∘F = {b}"


def check_indeterminacy() -> tuple[bool, str]:
    F = cubic_cycle()
    plus = indeterminacy_forms(F)
    minus = indeterminacy_forms(F.inverse)
    x, y, z = Polynomial.variables(3)
    ok = set(plus) == {x**2, y**2} and set(minus) == {-(z**4)}
    ok = ok and projective_disjointness(plus, minus)
    return ok, "I+ = {x = y = 0}, I- = {z = 0}, disjoint"


def check_regularity() -> tuple[bool, str]:
    r = regularity_report(cubic_cycle())
    ok = (r.k, r.d, r.delta, r.s) == (3, 2, 4, 2) and r.degree_identity_holds and r.indeterminacy_disjoint
    return ok, f"d={r.d} delta={r.delta} k={r.k} s={r.s} ({r.d}^{r.s} = {r.delta}^{r.k - r.s})"


def check_conjugation_displays() -> tuple[bool, str]:
    F = cubic_cycle()
    ans = generic_affine(3, indeterminacy_mask(F, F.inverse))
    if ans.parameters != ("a", "b", "c", "d", "e", "x0", "y0", "z0"):
        return False, f"unexpected ansatz {ans.parameters}"
    names = ["x", "y", "z", *ans.parameters]
    P = lambda s: parse_polynomial(s, names)  # noqa: E731
    first = conjugate(F, F.inverse, ans.as_polymap())
    expected_first = [
        P("c*z + d*(x - z^2) + y0 + (a*z + b*(x - z^2) + x0)^2"),
        P("e*(y - (x - z^2)^2) + z0 + (c*z + d*(x - z^2) + y0)^2"),
        P("a*z + b*(x - z^2) + x0"),
    ]
    xs = Polynomial.variables(8)
    a, x0 = xs[0], xs[5]
    vals = [a, Polynomial.zero(8), -2 * a * x0, a**2, a**4, x0, xs[6], xs[7]]
    second = conjugate(F, F.inverse, ans.as_polymap(vals))
    expected_second = [
        P("a^2*x + y0 + x0^2"),
        P(
            "a^4*y - 4*a^3*x0*x*z + 4*a^3*x0*z^3 + 4*a^2*x0^2*z^2 + 2*a^2*y0*x"
            " - 2*a^2*y0*z^2 - 4*a*x0*y0*z + y0^2 + z0"
        ),
        P("a*z + x0"),
    ]
    ok = list(first.components) == expected_first and list(second.components) == expected_second
    return ok, "both displayed expansions of F∘β∘F^-1 reproduced"


EXPECTED_ASSIGNMENTS = {"b": "0", "c": "0", "d": "a^2", "e": "a^4", "x0": "0", "y0": "0", "z0": "0"}
EXPECTED_TRACE = [("b", "0"), ("c", "-2*a*x0"), ("d", "a^2"), ("e", "a^4"), ("x0", "0"), ("y0", "0"), ("z0", "0")]


def check_group() -> tuple[bool, str]:
    fam = compute_N(cubic_cycle(), max_rounds=5)
    doc = fam.to_json()
    trace = {(s.param, s.value) for s in fam.trace}
    ok = (
        doc["status"] == "solved"
        and doc["assignments"] == EXPECTED_ASSIGNMENTS
        and doc["residual"] == ["a^7 - 1"]
        and doc["free_parameters"] == ["a"]
        and doc["element_count"] == 7
        and all(t in trace for t in EXPECTED_TRACE)
    )
    return ok, "N = {diag(a, a^2, a^4) : a^7 = 1}, 7 elements"


def check_noncommutation() -> tuple[bool, str]:
    F = cubic_cycle()
    rel = [PowerRelation(0, 7, 1)]
    # β = diag(a^2, a^4, a) is the family member at parameter a^2
    beta = symbolic_root_member(power=2)
    beta_inv = symbolic_root_member(power=12)  # a^-2 = a^12 mod a^7 = 1
    got = conjugate_by(beta, beta_inv, F, rel)
    formula_ok = got == reduce_map(noncommutation_formula(), rel)
    # as sets over the whole family, and never F itself unless a = 1
    field = [MonicRelation(0, cyclotomic(7))]
    lifted_F = PolyMap(tuple(c.lift(4) for c in F.components), nparams=1)
    family_images = set()
    formula_images = set()
    differs = True
    for j in range(7):
        b = symbolic_root_member(power=j)
        binv = symbolic_root_member(power=(7 - j) % 7)
        img = conjugate_by(b, binv, F, field if j else [])
        family_images.add(img)
        formula_images.add(reduce_map(noncommutation_formula(j), field if j else []))
        if j and img == reduce_map(lifted_F, field):
            differs = False
    ok = formula_ok and differs and family_images == formula_images
    return ok, "β∘F∘β^-1 = (a^-2(x^2+y), a^3(z+y^2), a^-1 x) for β = diag(a^2, a^4, a) ≠ F"


def check_example_commute() -> tuple[bool, str]:
    PF, PG = product_pair(1)
    return compose(PF, PG) == compose(PG, PF), "F∘G = G∘F on C^4"


def check_example_regular() -> tuple[bool, str]:
    PF, PG = product_pair(1)
    rf, rg = regularity_report(PF), regularity_report(PG)
    ok = rf.is_henon_sibony and rg.is_henon_sibony and rf.s == rg.s == 2
    return ok, f"s_F={rf.s}, s_G={rg.s}"


def check_example_no_shared_iterate() -> tuple[bool, str]:
    PF, PG = product_pair(1)
    found = shared_iterate_search(PF, PG, 3)
    return found is None, "no F^n = G^m with n, m <= 3" if found is None else f"found {found}"


def check_degree_growth() -> tuple[bool, str]:
    F = cubic_cycle()
    got = [(iterate(F, n).degree(), iterate(F.inverse, n).degree()) for n in (1, 2, 3)]
    return got == [(2**n, 4**n) for n in (1, 2, 3)], f"(deg F^n, deg F^-n) = {got}"


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("cubic-cycle inverse", check_inverse),
    ("cubic-cycle indeterminacy sets", check_indeterminacy),
    ("cubic-cycle regularity", check_regularity),
    ("cubic-cycle conjugation displays", check_conjugation_displays),
    ("cubic-cycle group N", check_group),
    ("cubic-cycle non-commutation", check_noncommutation),
    ("cubic-cycle degree growth", check_degree_growth),
    ("product maps commute", check_example_commute),
    ("product maps regular", check_example_regular),
    ("product maps share no iterate", check_example_no_shared_iterate),
]


def run_all() -> list[CheckResult]:
    return [_check(name, fn) for name, fn in CHECKS]
