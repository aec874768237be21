from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from henon_sibony.dsl import parse_polynomial
from henon_sibony.poly import (
    I,
    Budget,
    BudgetExceeded,
    GaussianRational,
    Polynomial,
    default_names,
    reduce_monic,
    reduce_power,
)

x, y, z = Polynomial.variables(3)

small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
gaussians = st.builds(GaussianRational, small_fracs, small_fracs)


@st.composite
def polys(draw, nvars=3, max_deg=3, max_terms=4):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        exps = tuple(draw(st.lists(st.integers(0, max_deg), min_size=nvars, max_size=nvars)))
        if sum(exps) > max_deg:
            continue
        terms[exps] = draw(gaussians)
    return Polynomial(nvars, terms)


@st.composite
def poly_tuples(draw, count, nvars=3, max_deg=2, max_terms=3):
    return [draw(polys(nvars, max_deg, max_terms)) for _ in range(count)]


points = st.lists(gaussians, min_size=3, max_size=3)


class TestGaussianRational:
    def test_i_squared(self):
        assert I * I == -1

    def test_division_roundtrip(self):
        a = GaussianRational(Fraction(3, 2), -2)
        b = GaussianRational(1, 1)
        assert (a / b) * b == a

    def test_negative_power(self):
        b = GaussianRational(1, 1)
        assert b**-2 * b**2 == 1

    def test_float_rejected(self):
        with pytest.raises(TypeError):
            GaussianRational(0.5)

    @pytest.mark.parametrize(
        "value, text",
        [
            (GaussianRational(3), "3"),
            (GaussianRational(Fraction(1, 2)), "1/2"),
            (I, "i"),
            (-I, "-i"),
            (GaussianRational(Fraction(1, 2), Fraction(3, 4)), "1/2+3/4*i"),
            (GaussianRational(1, -2), "1-2*i"),
        ],
    )
    def test_str(self, value, text):
        assert str(value) == text

    def test_hash_matches_real(self):
        assert hash(GaussianRational(Fraction(1, 3))) == hash(Fraction(1, 3))


class TestExamples:
    def test_cancellation(self):
        assert (x**2 + y) + (-(x**2)) == y

    def test_additive_identity(self):
        p = y + x**2
        assert p + Polynomial.zero(3) == p

    def test_sum_of_components(self):
        assert (y + x**2) + (z + y**2) == x**2 + y**2 + y + z

    def test_square(self):
        assert (x - z**2) * (x - z**2) == x**2 - 2 * x * z**2 + z**4

    def test_gaussian_product(self):
        assert (x + I * y) * (x - I * y) == x**2 + y**2

    def test_substitute_square(self):
        u, v = Polynomial.variables(2)
        p = Polynomial.variable(1, 0) ** 2
        assert p.substitute([v + u**2]) == v**2 + 2 * v * u**2 + u**4

    def test_substitute_identity(self):
        p = y + x**2 - 3 * z**3
        assert p.substitute([x, y, z]) == p

    def test_inverse_middle_coordinate(self):
        # second coordinate of F^-1 composed after F: (x - z^2) evaluated at F
        F = [y + x**2, z + y**2, x]
        assert (x - z**2).substitute(F) == y

    @pytest.mark.parametrize("p, d", [(y + x**2, 2), (Polynomial.constant(3, 5), 0), (Polynomial.zero(3), -1)])
    def test_degree(self, p, d):
        assert p.degree() == d

    def test_homogeneous_top(self):
        assert (y + x**2).homogeneous_top() == x**2
        assert (x - z**2).homogeneous_top() == -(z**2)
        h = x * y + z**2
        assert h.homogeneous_top() == h

    def test_homogeneous_top_of_zero(self):
        with pytest.raises(ValueError):
            Polynomial.zero(3).homogeneous_top()

    def test_eval_exact(self):
        assert (y + x**2).eval_exact([0, 0, 0]) == 0
        assert (x - z**2).eval_exact([2, 0, 1]) == 1

    def test_nvars_mismatch(self):
        with pytest.raises(ValueError):
            x + Polynomial.variable(2, 0)

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            (x + y).substitute([x, y])

    def test_no_stored_zeros(self):
        p = Polynomial(2, {(1, 0): 1, (0, 1): 0})
        assert len(p) == 1


class TestSerialization:
    def test_graded_lex_order(self):
        assert (z + y**2 + x).to_string(["x", "y", "z"]) == "y^2 + x + z"

    def test_default_names(self):
        assert (x**2 * y - Fraction(1, 2)).to_string() == "x1^2*x2 - 1/2"

    def test_complex_coefficient(self):
        p = GaussianRational(1, 2) * x
        assert parse_polynomial(p.to_string(), default_names(3)) == p

    @settings(max_examples=200, deadline=None)
    @given(polys())
    def test_roundtrip_fixed_point(self, p):
        names = default_names(3)
        s = p.to_string(names)
        q = parse_polynomial(s, names)
        assert q == p
        assert q.to_string(names) == s


class TestRingAxioms:
    @settings(max_examples=150, deadline=None)
    @given(polys(), polys(), polys())
    def test_associativity(self, p, q, r):
        assert (p + q) + r == p + (q + r)
        assert (p * q) * r == p * (q * r)

    @settings(max_examples=150, deadline=None)
    @given(polys(), polys())
    def test_commutativity(self, p, q):
        assert p + q == q + p
        assert p * q == q * p

    @settings(max_examples=150, deadline=None)
    @given(polys(), polys(), polys())
    def test_distributivity(self, p, q, r):
        assert p * (q + r) == p * q + p * r

    @settings(max_examples=100, deadline=None)
    @given(polys(), polys())
    def test_degree_of_product(self, p, q):
        if p and q:
            assert (p * q).degree() == p.degree() + q.degree()

    @given(polys())
    def test_negation(self, p):
        assert p - p == Polynomial.zero(3)


class TestSubstitute:
    @settings(max_examples=100, deadline=None)
    @given(polys(), polys(), poly_tuples(3))
    def test_homomorphism(self, p, q, maps):
        assert (p * q).substitute(maps) == p.substitute(maps) * q.substitute(maps)
        assert (p + q).substitute(maps) == p.substitute(maps) + q.substitute(maps)

    @settings(max_examples=120, deadline=None)
    @given(polys(), poly_tuples(3), points)
    def test_eval_commutes(self, p, maps, pt):
        inner = [m.eval_exact(pt) for m in maps]
        assert p.substitute(maps).eval_exact(pt) == p.eval_exact(inner)

    def test_budget_degree(self):
        with pytest.raises(BudgetExceeded) as info:
            (x**10).substitute([x**30, y, z], Budget(max_degree=256))
        assert info.value.degree == 300

    def test_budget_terms(self):
        p = (x + y + z + 1) ** 4
        with pytest.raises(BudgetExceeded):
            p.substitute([x + y + z + 1, y, z], Budget(max_terms=20))


class TestEvalFloat:
    @settings(max_examples=100, deadline=None)
    @given(
        polys(),
        st.lists(st.fractions(min_value=-1000, max_value=1000, max_denominator=16), min_size=6, max_size=6),
    )
    def test_float_matches_exact(self, p, parts):
        pt = [GaussianRational(parts[2 * j], parts[2 * j + 1]) for j in range(3)]
        exact = complex(p.eval_exact(pt))
        approx = p.eval_float([complex(c) for c in pt])
        scale = max(1.0, abs(exact), sum(abs(complex(c)) for c in p.terms.values()) * 1e9)
        assert abs(approx - exact) <= 1e-12 * scale


class TestParameterBlocks:
    def test_split_join(self):
        # k = 2 map variables plus one parameter a
        u, v, a = Polynomial.variables(3)
        p = a**2 * u + 3 * a * v + a + 1
        parts = p.split(2)
        assert parts[(1, 0)] == Polynomial.variable(1, 0) ** 2
        assert Polynomial.join(parts, 2, 1) == p

    def test_lift_and_drop(self):
        u = Polynomial.variable(1, 0)
        lifted = u.lift(3, 2)
        assert lifted == Polynomial.variable(3, 2)
        assert (x + 2).drop_trailing(1) == Polynomial.variable(1, 0) + 2

    def test_reduce_power(self):
        a = Polynomial.variable(1, 0)
        assert reduce_power(a**9 + a**7, 0, 7, 1) == a**2 + 1

    def test_reduce_monic_cyclotomic(self):
        t = Polynomial.variable(1, 0)
        # Phi_3 = t^2 + t + 1, constant first
        assert reduce_monic(t**2, 0, (1, 1, 1)) == -t - 1
        assert reduce_monic(t**3, 0, (1, 1, 1)) == Polynomial.one(1)
