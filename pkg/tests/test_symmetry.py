import numpy as np
import pytest

from henon_sibony import cubic_cycle, henon, product_pair
from henon_sibony.automorphism import PolyMap, compose, identity
from henon_sibony.dsl import parse_polynomial
from henon_sibony.poly import Budget, Polynomial
from henon_sibony.symmetry import (
    ConstraintSet,
    PowerRelation,
    SearchBudgetExceeded,
    SolutionFamily,
    affinity_constraints,
    closure_constraints,
    check_preserves_green,
    compute_N,
    conjugate,
    degree_pairs,
    generic_affine,
    indeterminacy_mask,
    invert_affine,
    reduce_map,
    shared_iterate_search,
    solve_constraints,
    verify_membership,
)


@pytest.fixture(scope="module")
def F():
    return cubic_cycle()


@pytest.fixture(scope="module")
def family(F):
    return compute_N(F, max_rounds=5)


@pytest.fixture(scope="module")
def members(family):
    return family.members()


def ansatz_for(F):
    return generic_affine(F.k, indeterminacy_mask(F, F.inverse))


def P(text, F):
    names = ["x", "y", "z", *ansatz_for(F).parameters]
    return parse_polynomial(text, names)


class TestAnsatz:
    def test_full_k3(self):
        assert generic_affine(3).nparams == 12

    def test_k1(self):
        assert generic_affine(1).nparams == 2

    def test_masked(self, F):
        ans = ansatz_for(F)
        assert ans.parameters == ("a", "b", "c", "d", "e", "x0", "y0", "z0")
        assert ans.masked == frozenset({(0, 2), (1, 2), (2, 0), (2, 1)})

    def test_no_mask_for_henon(self):
        # I^+ = {y = 0} and I^- = {x = 0} at infinity: both coordinate subspaces
        h = henon(1)
        assert indeterminacy_mask(h, h.inverse) is not None


class TestConjugate:
    def test_third_coordinate(self, F):
        M = conjugate(F, F.inverse, ansatz_for(F).as_polymap())
        assert M.components[2] == P("a*z + b*(x - z^2) + x0", F)

    def test_identity_beta(self, F):
        assert conjugate(F, F.inverse, identity(3)) == identity(3)

    def test_second_round_term(self, F):
        # after b = 0, c = -2a x0, d = a^2, e = a^4
        ans = ansatz_for(F)
        xs = Polynomial.variables(8)
        a, x0 = xs[0], xs[5]
        vals = [a, Polynomial.zero(8), -2 * a * x0, a**2, a**4, x0, xs[6], xs[7]]
        M = conjugate(F, F.inverse, ans.as_polymap(vals))
        term = P("-4*a^3*x0*x*z", F)
        (exps, coef), = term.terms.items()
        assert M.components[1].coefficient(exps) == coef


class TestConstraints:
    def test_first_round_has_b(self, F):
        M = conjugate(F, F.inverse, ansatz_for(F).as_polymap())
        eqs = affinity_constraints(M).equations
        assert Polynomial.variable(8, 1) in eqs

    def test_second_round(self, F):
        ans = ansatz_for(F)
        xs = Polynomial.variables(8)
        vals = list(xs)
        vals[1] = Polynomial.zero(8)
        M = conjugate(F, F.inverse, ans.as_polymap(vals))
        fam = SolutionFamily.initial(ans)
        fam.assignments[1] = Polynomial.zero(8)
        # degree >= 2 coefficients plus the masked-entry closure conditions
        eqs = set(affinity_constraints(M).equations)
        eqs |= {e.content_normalized() for e in closure_constraints(M, fam) if e}
        a, c, d, x0 = xs[0], xs[2], xs[3], xs[5]
        assert (c + 2 * a * x0).content_normalized() in eqs
        assert (d - a**2).content_normalized() in eqs

    def test_affine_map_has_no_constraints(self):
        assert affinity_constraints(generic_affine(2).as_polymap()).equations == ()

    def test_empty_set_leaves_family(self):
        fam = SolutionFamily.initial(generic_affine(2))
        out = solve_constraints(ConstraintSet(fam.m, ()), fam)
        assert out.status == "solved" and out.assignments == {} and out.residual == {}

    def test_sum_of_squares_unsolved(self):
        fam = SolutionFamily.initial(generic_affine(1))
        p, q = Polynomial.variables(2)
        out = solve_constraints(ConstraintSet(2, (p**2 + q**2 - 1,)), fam)
        assert out.status == "unsolved"
        assert p**2 + q**2 - 1 in out.unresolved

    def test_linear_and_binomial_rules(self):
        fam = SolutionFamily.initial(generic_affine(1))
        p, q = Polynomial.variables(2)
        out = solve_constraints(ConstraintSet(2, (q - p**2, p**3 - 1)), fam)
        assert out.status == "solved"
        assert out.assignments == {1: p**2}
        assert out.residual[0][0] == 3
        assert out.element_count() == 3


class TestCubicCycleFamily:
    def test_result(self, family):
        doc = family.to_json()
        assert doc["status"] == "solved" and doc["stabilized"]
        assert doc["assignments"] == {"b": "0", "c": "0", "d": "a^2", "e": "a^4", "x0": "0", "y0": "0", "z0": "0"}
        assert doc["residual"] == ["a^7 - 1"]
        assert family.element_count() == 7

    def test_trace_order(self, family):
        lines = [str(s) for s in family.trace]
        assert lines[:4] == [
            "round 1 [i] b = 0",
            "round 1 [ii] c = -2*a*x0",
            "round 1 [ii] d = a^2",
            "round 1 [ii] e = a^4",
        ]
        assert lines[-1] == "round 2 [iv] a = root: a^7 - 1 = 0"

    def test_soundness(self, F, family):
        # the first-round equations vanish under the final assignments, modulo a^7 = 1
        M = conjugate(F, F.inverse, ansatz_for(F).as_polymap())
        for eq in affinity_constraints(M).equations:
            assert not family.reduce(eq)

    def test_unit_determinant(self, family, members):
        # det = a * a^2 * a^4 = a^7, which the residual reduces to 1
        assert family.determinant() == Polynomial.one(family.m)
        assert len(members) == 7
        for m in members:
            assert abs(np.linalg.det(m.numeric()[0]) - 1) < 1e-12

    def test_membership(self, F, members):
        for m in members:
            assert verify_membership(F, F.inverse, m.beta, 3, m.relations)

    def test_inverse_and_product_closure(self, F, members):
        rel = members[1].relations
        reduced = {reduce_map(m.beta, rel) for m in members}
        for m in members:
            inv = invert_affine(m.beta, rel)
            assert reduce_map(compose(m.beta, inv), rel) == identity(3, 1)
            assert inv in reduced
            assert verify_membership(F, F.inverse, inv, 3, rel)

    def test_lf_stability(self, F, members):
        rel = members[1].relations
        reduced = {reduce_map(m.beta, rel) for m in members}
        for m in members:
            image = reduce_map(conjugate(F, F.inverse, m.beta), rel)
            assert image in reduced


class TestMembership:
    def _diag(self, entries, nparams=0):
        k = len(entries)
        xs = Polynomial.variables(k + nparams)
        return PolyMap(tuple(e.lift(k + nparams, k) * xs[i] if isinstance(e, Polynomial) else e * xs[i]
                             for i, e in enumerate(entries)), nparams=nparams)

    def test_symbolic_root_seven_rounds(self, F):
        a = Polynomial.variable(1, 0)
        beta = self._diag([a, a**2, a**4], 1)
        assert verify_membership(F, F.inverse, beta, 7, [PowerRelation(0, 7, 1)])

    def test_diag_2_4_16_rejected(self, F):
        assert not verify_membership(F, F.inverse, self._diag([2, 4, 16]), 3)

    def test_identity(self, F):
        assert verify_membership(F, F.inverse, identity(3), 3)

    def test_singular_rejected(self, F):
        assert not verify_membership(F, F.inverse, self._diag([0, 0, 0]), 1)

    def test_rounds_validated(self, F):
        with pytest.raises(ValueError):
            verify_membership(F, F.inverse, identity(3), 0)


class TestHenonFamilies:
    # pinned by running the solver; each member independently verified below
    @pytest.mark.parametrize("c, count", [(1, 1), (2, 1), (0, 3)])
    def test_counts(self, c, count):
        h = henon(c)
        fam = compute_N(h)
        assert fam.status == "solved" and fam.stabilized
        assert fam.element_count() == count
        for m in fam.members():
            assert verify_membership(h, h.inverse, m.beta, 3, m.relations)

    def test_c0_members_are_diagonal_cube_roots(self):
        fam = compute_N(henon(0))
        doc = fam.to_json()
        assert doc["assignments"]["a"] == "b^2"
        assert doc["residual"] == ["b^3 - 1"]
        for L, v in fam.numeric_members():
            assert np.allclose(v, 0)
            assert abs(L[0, 0] - L[1, 1] ** 2) < 1e-12 and abs(L[1, 1] ** 3 - 1) < 1e-12

    def test_c0_non_member(self):
        h = henon(0)
        x, y = Polynomial.variables(2)
        assert not verify_membership(h, h.inverse, PolyMap((2 * x, y)), 3)


def test_product_family_unsolved():
    PF, _ = product_pair(1)
    fam = compute_N(PF)
    assert fam.status == "unsolved"
    assert fam.unresolved
    assert fam.element_count() is None


class TestSharedIterate:
    def test_self(self, F):
        assert shared_iterate_search(F, F, 3) == (1, 1)

    def test_square(self, F):
        assert shared_iterate_search(F, compose(F, F), 3) == (2, 1)

    def test_product_maps(self):
        assert shared_iterate_search(*product_pair(1), 3) is None

    def test_degree_filter(self):
        assert degree_pairs(2, 4, 3) == [(2, 1)]
        assert degree_pairs(2, 3, 3) == []
        assert degree_pairs(2, 2, 2) == [(1, 1), (2, 2)]

    def test_budget_reports_frontier(self):
        with pytest.raises(SearchBudgetExceeded) as info:
            shared_iterate_search(*product_pair(1), 4, Budget(max_degree=4))
        assert info.value.frontier == [(3, 3), (4, 4)]


@pytest.fixture(scope="module")
def samples():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((200, 6))
    X /= np.linalg.norm(X, axis=1)[:, None]
    X *= 2 * rng.random(200)[:, None] ** (1 / 6)
    return X[:, :3] + 1j * X[:, 3:]


class TestGreenPreservation:
    def test_identity(self, F, samples):
        rep = check_preserves_green(identity(3), F, 2, samples[:50])
        assert rep.passed and rep.max_residual == 0

    def test_seventh_root(self, F, samples):
        z = np.exp(2j * np.pi / 7)
        beta = (np.diag([z, z**2, z**4]), np.zeros(3))
        rep = check_preserves_green(beta, F, 2, samples, tol=1e-6)
        assert rep.passed and rep.samples_used + rep.undecided == 200

    def test_enumerated_members(self, F, members, samples):
        for m in members:
            assert check_preserves_green(m, F, 2, samples[:40]).passed

    def test_diag_2_4_16_fails(self, F, samples):
        beta = (np.diag([2.0, 4.0, 16.0]), np.zeros(3))
        rep = check_preserves_green(beta, F, 2, samples)
        assert not rep.passed and rep.max_excess > 0.1
