"""The conjugation group N = {β affine : f^n ∘ β ∘ f^-n affine for all n}.

The group is computed by iterated refinement of an affine ansatz with
symbolic parameters. Each round conjugates the current family by ``f``,
demands that the result is affine and lies in the family again, and feeds
the resulting polynomial equations to a small rule-based eliminator. The
eliminator only handles equation shapes it can solve exactly; anything else
is reported back as an unsolved residual.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np

from .automorphism import PolyMap, compose, identity, indeterminacy_forms, iterate
from .poly import (
    DEFAULT_BUDGET,
    Budget,
    BudgetExceeded,
    GaussianRational,
    Polynomial,
    reduce_monic,
    reduce_power,
)

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# relations on parameter variables


@dataclass(frozen=True)
class PowerRelation:
    """``p^n = c`` for parameter ``param``."""

    param: int
    n: int
    c: GaussianRational

    def apply(self, p: Polynomial, offset: int = 0) -> Polynomial:
        return reduce_power(p, offset + self.param, self.n, self.c)


@dataclass(frozen=True)
class MonicRelation:
    """``m(p) = 0`` for a monic univariate ``m`` (coefficients constant term first)."""

    param: int
    coeffs: tuple

    def apply(self, p: Polynomial, offset: int = 0) -> Polynomial:
        return reduce_monic(p, offset + self.param, self.coeffs)


Relation = PowerRelation | MonicRelation


def reduce_map(M: PolyMap, relations: Sequence[Relation]) -> PolyMap:
    comps = []
    for c in M.components:
        for r in relations:
            c = r.apply(c, M.k)
        comps.append(c)
    return PolyMap(tuple(comps), names=M.names, nparams=M.nparams)


def cyclotomic(n: int) -> tuple[int, ...]:
    """Integer coefficients of the n-th cyclotomic polynomial, constant first."""
    if n < 1:
        raise ValueError("n must be positive")

    def divide(num: list[int], den: list[int]) -> list[int]:
        num = num[:]
        out = [0] * (len(num) - len(den) + 1)
        for i in range(len(out) - 1, -1, -1):
            q = num[i + len(den) - 1] // den[-1]
            out[i] = q
            for j, dj in enumerate(den):
                num[i + j] -= q * dj
        assert not any(num[: len(den) - 1])
        return out

    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = divide(poly, list(cyclotomic(d)))
    return tuple(poly)


# ---------------------------------------------------------------------------
# affine ansatz


_LETTERS = "abcdefghjklmnopqrstuv"


@dataclass(frozen=True)
class ParametricAffineMap:
    """β(x) = L x + t with entries polynomial in named parameters.

    ``slots[j]`` says where parameter ``j`` sits: ``("L", row, col)`` or
    ``("t", row)``. Masked linear entries are fixed to zero.
    """

    k: int
    parameters: tuple[str, ...]
    slots: tuple[tuple, ...]
    masked: frozenset
    variable_names: tuple[str, ...]

    @property
    def nparams(self) -> int:
        return len(self.parameters)

    def entry(self, slot: tuple, values: Sequence[Polynomial]) -> Polynomial:
        """The polynomial sitting at ``slot`` given per-parameter values."""
        for j, s in enumerate(self.slots):
            if s == slot:
                return values[j]
        return Polynomial.zero(values[0].nvars if values else self.nparams)

    def linear(self, values: Sequence[Polynomial] | None = None) -> list[list[Polynomial]]:
        values = values if values is not None else Polynomial.variables(self.nparams)
        return [[self.entry(("L", i, j), values) for j in range(self.k)] for i in range(self.k)]

    def translation(self, values: Sequence[Polynomial] | None = None) -> list[Polynomial]:
        values = values if values is not None else Polynomial.variables(self.nparams)
        return [self.entry(("t", i), values) for i in range(self.k)]

    def as_polymap(self, values: Sequence[Polynomial] | None = None) -> PolyMap:
        """The map in k + m variables, m the size of the values' ring."""
        values = values if values is not None else Polynomial.variables(self.nparams)
        k, m = self.k, values[0].nvars
        L = self.linear(values)
        t = self.translation(values)
        xs = Polynomial.variables(k + m)[:k]
        comps = []
        for i in range(k):
            acc = t[i].lift(k + m, k)
            for j in range(k):
                if L[i][j]:
                    acc = acc + L[i][j].lift(k + m, k) * xs[j]
            comps.append(acc)
        return PolyMap(tuple(comps), names=self.variable_names, nparams=m)

    def determinant(self, values: Sequence[Polynomial] | None = None) -> Polynomial:
        return determinant(self.linear(values))


def determinant(L: Sequence[Sequence[Polynomial]]) -> Polynomial:
    k = len(L)
    nv = L[0][0].nvars
    total = Polynomial.zero(nv)
    for perm in itertools.permutations(range(k)):
        term = Polynomial.one(nv)
        for i, j in enumerate(perm):
            if not L[i][j]:
                term = None
                break
            term = term * L[i][j]
        if term is None:
            continue
        inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
        total = total - term if inversions % 2 else total + term
    return total


def _default_variable_names(k: int) -> tuple[str, ...]:
    if k <= 3:
        return ("x", "y", "z")[:k]
    if k == 4:
        return ("x", "y", "z", "w")
    return tuple(f"x{i + 1}" for i in range(k))


def generic_affine(
    k: int,
    mask: Iterable[tuple[int, int]] | None = None,
    variable_names: Sequence[str] | None = None,
) -> ParametricAffineMap:
    """Fresh parameters for every linear entry not in ``mask`` and every
    translation coordinate."""
    if k < 1:
        raise ValueError("k must be at least 1")
    names = tuple(variable_names) if variable_names else _default_variable_names(k)
    masked = frozenset(mask or ())
    trans_names = [f"{v}0" for v in names]
    taken = set(names) | set(trans_names)
    letters = [ch for ch in _LETTERS if ch not in taken]
    free = [(i, j) for i in range(k) for j in range(k) if (i, j) not in masked]
    params: list[str] = []
    slots: list[tuple] = []
    for n, (i, j) in enumerate(free):
        params.append(letters[n] if len(free) <= len(letters) else f"m{i + 1}{j + 1}")
        slots.append(("L", i, j))
    for i in range(k):
        params.append(trans_names[i])
        slots.append(("t", i))
    return ParametricAffineMap(k, tuple(params), tuple(slots), masked, names)


def _coordinate_subspace(forms: Sequence[Polynomial]) -> frozenset[int] | None:
    """If the common zero set of monomial ``forms`` is a single coordinate
    subspace ``{z_i = 0 : i in H}``, return H."""
    if not forms or any(len(f) != 1 for f in forms):
        return None
    supports = [f.support() for f in forms]
    k = forms[0].nvars
    hitting = []
    for size in range(1, k + 1):
        for H in itertools.combinations(range(k), size):
            Hs = set(H)
            if all(s & Hs for s in supports) and not any(h <= Hs for h in hitting):
                hitting.append(Hs)
    if len(hitting) != 1:
        return None
    return frozenset(hitting[0])


def indeterminacy_mask(F: PolyMap, F_inv: PolyMap) -> frozenset | None:
    """Linear entries forced to zero by fixing both indeterminacy sets.

    Only returned when both sets are coordinate subspaces readable directly
    off monomial top forms; ``None`` otherwise.
    """
    zero_plus = _coordinate_subspace(indeterminacy_forms(F))
    zero_minus = _coordinate_subspace(indeterminacy_forms(F_inv))
    if zero_plus is None or zero_minus is None:
        return None
    k = F.k
    mask = set()
    for H in (zero_plus, zero_minus):
        # V = span(e_j : j not in H) must map into itself
        for j in range(k):
            if j in H:
                continue
            for i in H:
                mask.add((i, j))
    return frozenset(mask)


# ---------------------------------------------------------------------------
# conjugation and constraints


def conjugate(
    F: PolyMap, F_inv: PolyMap, beta: PolyMap, budget: Budget | None = DEFAULT_BUDGET
) -> PolyMap:
    """``F ∘ β ∘ F^-1`` with β possibly parametric."""
    if not (F.k == F_inv.k == beta.k):
        raise ValueError("dimension mismatch")
    return compose(F, compose(beta, F_inv, budget), budget)


@dataclass(frozen=True)
class AffineParts:
    linear: tuple[tuple[Polynomial, ...], ...]
    translation: tuple[Polynomial, ...]
    nonlinear: tuple[tuple[int, tuple, Polynomial], ...]  # (component, monomial, coeff)


def affine_parts(M: PolyMap) -> AffineParts:
    k, m = M.k, M.nparams
    zero = Polynomial.zero(m)
    lin = [[zero] * k for _ in range(k)]
    trans = [zero] * k
    nonlinear = []
    for i, comp in enumerate(M.components):
        for head, coeff in sorted(comp.split(k).items(), key=lambda t: (-sum(t[0]), t[0])):
            deg = sum(head)
            if deg == 0:
                trans[i] = coeff
            elif deg == 1:
                lin[i][head.index(1)] = coeff
            else:
                nonlinear.append((i, head, coeff))
    return AffineParts(tuple(map(tuple, lin)), tuple(trans), tuple(nonlinear))


@dataclass(frozen=True)
class ConstraintSet:
    """Polynomial equations (``= 0``) and disequalities (``!= 0``) in the
    parameters."""

    nparams: int
    equations: tuple[Polynomial, ...] = ()
    disequalities: tuple[Polynomial, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "equations", _canonical_equations(self.equations))
        object.__setattr__(self, "disequalities", _canonical_equations(self.disequalities))

    def __bool__(self):
        return bool(self.equations)


def _canonical_equations(eqs: Iterable[Polynomial]) -> tuple[Polynomial, ...]:
    seen = set()
    out = []
    for e in eqs:
        if not e:
            continue
        e = e.content_normalized()
        if e not in seen:
            seen.add(e)
            out.append(e)
    return tuple(out)


def affinity_constraints(M: PolyMap, require_automorphism: bool = False) -> ConstraintSet:
    """One equation per nonzero coefficient of a monomial of degree >= 2."""
    parts = affine_parts(M)
    eqs = [c for _, _, c in parts.nonlinear]
    dis = [determinant(parts.linear)] if require_automorphism else []
    return ConstraintSet(M.nparams, tuple(eqs), tuple(dis))


# ---------------------------------------------------------------------------
# solution families


@dataclass(frozen=True)
class TraceStep:
    round: int
    rule: str
    param: str
    value: str  # right-hand side, or the residual relation

    def __str__(self):
        return f"round {self.round} [{self.rule}] {self.param} = {self.value}"


@dataclass
class SolutionFamily:
    """Affine maps ``ansatz`` with some parameters assigned in terms of the
    free ones, subject to residual relations ``p^n = c``."""

    ansatz: ParametricAffineMap
    assignments: dict[int, Polynomial] = field(default_factory=dict)
    residual: dict[int, tuple[int, GaussianRational]] = field(default_factory=dict)
    unresolved: tuple[Polynomial, ...] = ()
    status: str = "solved"
    trace: list[TraceStep] = field(default_factory=list)
    rounds: int = 0
    stabilized: bool = False
    note: str = ""

    @classmethod
    def initial(cls, ansatz: ParametricAffineMap) -> "SolutionFamily":
        return cls(ansatz)

    def copy(self) -> "SolutionFamily":
        return SolutionFamily(
            self.ansatz,
            dict(self.assignments),
            dict(self.residual),
            tuple(self.unresolved),
            self.status,
            list(self.trace),
            self.rounds,
            self.stabilized,
            self.note,
        )

    @property
    def m(self) -> int:
        return self.ansatz.nparams

    @property
    def names(self) -> list[str]:
        return list(self.ansatz.parameters)

    def free_parameters(self) -> list[int]:
        return [j for j in range(self.m) if j not in self.assignments]

    def relations(self) -> list[PowerRelation]:
        return [PowerRelation(j, n, c) for j, (n, c) in sorted(self.residual.items())]

    def values(self) -> list[Polynomial]:
        """Per-parameter value in terms of the free parameters."""
        xs = Polynomial.variables(self.m)
        return [self.assignments.get(j, xs[j]) for j in range(self.m)]

    def reduce(self, p: Polynomial) -> Polynomial:
        """Substitute assignments and apply residual relations (param-only polys)."""
        if self.assignments:
            p = p.substitute(self.values(), None)
        for r in self.relations():
            p = r.apply(p)
        return p

    def instantiate(self) -> PolyMap:
        return self.ansatz.as_polymap(self.values())

    def determinant(self) -> Polynomial:
        return self.reduce(self.ansatz.determinant(self.values()))

    def units(self) -> set[int]:
        """Parameters known to be nonzero."""
        out = {j for j, (n, c) in self.residual.items() if c}
        det = self.determinant()
        if len(det) == 1:
            (e,) = det.terms
            out.update(j for j, x in enumerate(e) if x)
        return out

    def is_finite(self) -> bool:
        if self.status != "solved" or self.unresolved:
            return False
        return all(j in self.residual for j in self.free_parameters())

    def element_count(self) -> int | None:
        if not self.is_finite():
            return None
        count = 1
        for j in self.free_parameters():
            count *= self.residual[j][0]
        return count

    def linear_matrix(self) -> list[list[Polynomial]]:
        return self.ansatz.linear(self.values())

    def translation_vector(self) -> list[Polynomial]:
        return self.ansatz.translation(self.values())

    def fmt(self, p: Polynomial) -> str:
        return p.to_string(self.names)

    def residual_equations(self) -> list[Polynomial]:
        xs = Polynomial.variables(self.m)
        return [xs[j] ** n - c for j, (n, c) in sorted(self.residual.items())]

    def to_json(self) -> dict:
        names = self.names
        return {
            "parameters": names,
            "free_parameters": [names[j] for j in self.free_parameters()],
            "assignments": {names[j]: self.fmt(v) for j, v in sorted(self.assignments.items())},
            "residual": [self.fmt(e) for e in self.residual_equations()],
            "unresolved": [self.fmt(e) for e in self.unresolved],
            "status": self.status,
            "stabilized": self.stabilized,
            "rounds": self.rounds,
            "element_count": self.element_count(),
            "linear": [[self.fmt(x) for x in row] for row in self.linear_matrix()],
            "translation": [self.fmt(x) for x in self.translation_vector()],
            "trace": [str(s) for s in self.trace],
            "note": self.note,
        }

    # -- enumeration ------------------------------------------------------

    def members(self) -> list["Member"]:
        """Every element of a finite family, exactly, over a cyclotomic field.

        Each free parameter with residual ``p^n = 1`` runs over the n-th roots
        of unity, written as powers of one primitive L-th root ``t``.
        """
        if not self.is_finite():
            raise ValueError("family is not finite (or not solved)")
        free = self.free_parameters()
        for j in free:
            if self.residual[j][1] != 1:
                raise ValueError("enumeration supports residuals p^n = 1 only")
        orders = [self.residual[j][0] for j in free]
        L = lcm(*orders) if orders else 1
        k = self.ansatz.k
        out = []
        for exps in itertools.product(*(range(n) for n in orders)):
            if L == 1:
                params = [Polynomial.constant(0, v.constant_term()) for v in self.values()]
                beta = self.ansatz.as_polymap(params)
                relations: tuple = ()
            else:
                t = Polynomial.variable(1, 0)
                sub = {j: t ** (e * (L // n)) for j, e, n in zip(free, exps, orders)}
                maps = [sub.get(j, Polynomial.zero(1)) for j in range(self.m)]
                relation = MonicRelation(0, tuple(cyclotomic(L)))
                params = []
                for v in self.values():
                    p = v.substitute(maps, None)
                    params.append(relation.apply(p))
                beta = self.ansatz.as_polymap(params)
                relations = (relation,)
            label = ", ".join(
                f"{self.names[j]} = t^{e * (L // n)}" for j, e, n in zip(free, exps, orders)
            )
            out.append(Member(beta, relations, label or "identity", L))
        return out

    def numeric_members(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Elements as complex (matrix, translation) pairs."""
        out = []
        for mem in self.members():
            out.append(mem.numeric())
        return out


@dataclass(frozen=True)
class Member:
    """One concrete affine map; coefficients may involve a primitive L-th
    root of unity ``t`` (one trailing parameter, reduced by ``relations``)."""

    beta: PolyMap
    relations: tuple
    label: str
    order: int = 1

    def numeric(self) -> tuple[np.ndarray, np.ndarray]:
        k = self.beta.k
        t = np.exp(2j * np.pi / self.order) if self.order > 1 else 1.0
        point_params = [t] if self.beta.nparams else []
        L = np.zeros((k, k), dtype=complex)
        v = np.zeros(k, dtype=complex)
        for i, comp in enumerate(self.beta.components):
            zero = [0j] * k
            v[i] = comp.eval_float(zero + point_params)
            for j in range(k):
                e = [0j] * k
                e[j] = 1.0
                L[i, j] = comp.eval_float(e + point_params) - v[i]
        return L, v


# ---------------------------------------------------------------------------
# the eliminator


def _linear_candidate(eq: Polynomial, j: int) -> GaussianRational | None:
    """Coefficient c if ``eq = c*p_j + rest`` with ``p_j`` absent from rest
    and c a constant."""
    coef = None
    for e, c in eq.terms.items():
        if e[j]:
            if e[j] != 1 or any(x for i, x in enumerate(e) if i != j) or coef is not None:
                return None
            coef = c
    return coef


def _strip_units(eq: Polynomial, units: set[int]) -> Polynomial:
    if not units or not eq:
        return eq
    lows = {j: min(e[j] for e in eq.terms) for j in units}
    lows = {j: v for j, v in lows.items() if v}
    if not lows:
        return eq
    out = {}
    for e, c in eq.terms.items():
        out[tuple(x - lows.get(i, 0) for i, x in enumerate(e))] = c
    return Polynomial(eq.nvars, out)


def _univariate_binomial(eq: Polynomial) -> tuple[int, int, GaussianRational] | None:
    """(param, n, c) if ``eq`` is ``α p^n + β`` (so p^n = -β/α)."""
    support = eq.support()
    if len(support) != 1 or len(eq) > 2:
        return None
    (j,) = support
    lead = None
    const = GaussianRational(0)
    for e, c in eq.terms.items():
        if e[j]:
            lead = (e[j], c)
        else:
            const = c
    if lead is None:
        return None
    n, alpha = lead
    return j, n, -const / alpha


def _merge_power(a: tuple[int, GaussianRational], b: tuple[int, GaussianRational]):
    """Combine p^m = A and p^n = B (A, B nonzero) into one relation, or None
    if inconsistent."""
    (m, A), (n, B) = a, b
    while n:
        # p^m = p^(q n + r) = B^q p^r
        q, r = divmod(m, n)
        A = A / B**q
        (m, A), (n, B) = (n, B), (r, A)
    # now p^0 = B must equal 1
    return (m, A) if B == 1 else None


class _Eliminator:
    def __init__(self, family: SolutionFamily, round_no: int):
        self.fam = family
        self.round = round_no

    def names(self) -> list[str]:
        return self.fam.names

    def assign(self, j: int, value: Polynomial, rule: str) -> None:
        fam = self.fam
        fam.assignments[j] = value
        xs = Polynomial.variables(fam.m)
        maps = [xs[i] if i != j else value for i in range(fam.m)]
        for i in list(fam.assignments):
            if i != j:
                fam.assignments[i] = fam.assignments[i].substitute(maps, None)
        if j in fam.residual:
            # the relation becomes an equation on the value
            n, c = fam.residual.pop(j)
            self.pending.append(value**n - c)
        for i in list(fam.assignments):
            fam.assignments[i] = fam.reduce(fam.assignments[i])
        fam.trace.append(TraceStep(self.round, rule, fam.names[j], fam.fmt(fam.assignments[j])))

    def add_residual(self, j: int, n: int, c: GaussianRational) -> bool:
        fam = self.fam
        if j in fam.residual:
            merged = _merge_power(fam.residual[j], (n, c))
            if merged is None:
                return False
            n, c = merged
        fam.residual[j] = (n, c)
        for i in list(fam.assignments):
            fam.assignments[i] = fam.reduce(fam.assignments[i])
        x = Polynomial.variable(fam.m, j)
        fam.trace.append(TraceStep(self.round, "iv", fam.names[j], f"root: {fam.fmt(x ** n - c)} = 0"))
        return True

    def run(self, equations: Iterable[Polynomial]) -> SolutionFamily:
        fam = self.fam
        self.pending = list(equations)
        while True:
            eqs = list(_canonical_equations(fam.reduce(e) for e in self.pending))
            self.pending = eqs
            if not eqs:
                fam.status = "solved"
                fam.unresolved = ()
                return fam
            if not fam.determinant():
                fam.status = "unsolved"
                fam.unresolved = tuple(eqs)
                fam.note = "linear part forced to be singular"
                return fam
            if self.step(eqs):
                continue
            fam.status = "unsolved"
            fam.unresolved = tuple(eqs)
            return fam

    def step(self, eqs: list[Polynomial]) -> bool:
        fam = self.fam
        # (i)/(ii): solve an equation linear in one parameter with constant coefficient
        cands = []
        for idx, eq in enumerate(eqs):
            for j in sorted(eq.support()):
                c = _linear_candidate(eq, j)
                if c is not None:
                    cands.append((len(eq), eq.degree(), j, idx, c))
                    break
        if cands:
            size, _, j, idx, c = min(cands)
            eq = eqs[idx]
            x = Polynomial.variable(fam.m, j)
            value = -(eq - x * c) * c.inverse()
            self.assign(j, value, "ii" if size == 2 else "i")
            return True
        # (iii): cancel factors known to be nonzero
        units = fam.units()
        changed = False
        for idx, eq in enumerate(eqs):
            stripped = _strip_units(eq, units)
            if stripped != eq:
                if stripped.is_constant():
                    fam.note = "inconsistent: a unit was forced to vanish"
                    return False
                eqs[idx] = stripped
                changed = True
        if changed:
            self.pending = eqs
            return True
        # (iv): univariate p^n = c
        for eq in eqs:
            hit = _univariate_binomial(eq)
            if hit is None:
                continue
            j, n, c = hit
            if not c:
                self.assign(j, Polynomial.zero(fam.m), "iv")
            elif not self.add_residual(j, n, c):
                fam.note = f"inconsistent roots of unity for {fam.names[j]}"
                return False
            return True
        return False


def solve_constraints(C: ConstraintSet, family: SolutionFamily, round_no: int = 0) -> SolutionFamily:
    """Apply the elimination rules to a fixed point.

    Rules, in priority order: (i) solve an equation linear in one parameter
    with constant coefficient ((ii) when the equation is a binomial);
    (iii) divide out parameters known to be nonzero; (iv) keep a univariate
    ``p^n = c`` as a residual root-of-unity relation. Anything else leaves
    the family ``unsolved`` with the offending equations in ``unresolved``.
    """
    fam = family.copy()
    return _Eliminator(fam, round_no).run(C.equations)


def closure_constraints(M: PolyMap, family: SolutionFamily) -> list[Polynomial]:
    """Equations saying the affine part of M lies in ``family`` again."""
    parts = affine_parts(M)
    ans = family.ansatz
    k = ans.k
    eqs = []
    for i, j in sorted(ans.masked):
        eqs.append(parts.linear[i][j])

    def at(slot):
        if slot[0] == "L":
            return parts.linear[slot[1]][slot[2]]
        return parts.translation[slot[1]]

    new_vals = [at(s) for s in ans.slots]
    for j, value in family.assignments.items():
        eqs.append(new_vals[j] - value.substitute(new_vals, None))
    for eq in family.residual_equations():
        eqs.append(eq.substitute(new_vals, None))
    return eqs


def compute_N(
    F: PolyMap,
    F_inv: PolyMap | None = None,
    max_rounds: int = 8,
    use_mask: bool = True,
    budget: Budget | None = DEFAULT_BUDGET,
) -> SolutionFamily:
    """Refine an affine ansatz until ``F ∘ β ∘ F^-1`` stays in the family."""
    F_inv = F_inv if F_inv is not None else F.inverse
    if F_inv is None:
        raise ValueError("compute_N needs the inverse map")
    mask = indeterminacy_mask(F, F_inv) if use_mask else None
    ansatz = generic_affine(F.k, mask, F.names if F.names else None)
    family = SolutionFamily.initial(ansatz)
    if mask:
        family.note = "ansatz restricted by indeterminacy sets"
    for r in range(1, max_rounds + 1):
        family.rounds = r
        beta = family.instantiate()
        M = reduce_map(conjugate(F, F_inv, beta, budget), family.relations())
        eqs = list(affinity_constraints(M).equations) + closure_constraints(M, family)
        pending = [e for e in (family.reduce(e) for e in eqs) if e]
        log.debug("round %d: %d nonzero equations", r, len(pending))
        if not pending:
            family.stabilized = True
            return family
        family = solve_constraints(ConstraintSet(family.m, tuple(pending)), family, r)
        if family.status != "solved":
            return family
    family.note = (family.note + "; " if family.note else "") + f"no stabilization within {max_rounds} rounds"
    return family


# ---------------------------------------------------------------------------
# concrete members


def verify_membership(
    F: PolyMap,
    F_inv: PolyMap,
    beta: PolyMap,
    rounds: int,
    relations: Sequence[Relation] = (),
    budget: Budget | None = DEFAULT_BUDGET,
) -> bool:
    """True iff f^j ∘ β ∘ f^-j is affine for 1 <= j <= rounds.

    Computed by successive conjugation. ``beta`` may carry parameters reduced
    by ``relations`` (e.g. a symbolic root of unity).
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    cur = reduce_map(beta, relations)
    if not cur.is_affine() or not _affine_det(cur, relations):
        return False
    for _ in range(rounds):
        cur = reduce_map(conjugate(F, F_inv, cur, budget), relations)
        if not cur.is_affine():
            return False
    return True


def _affine_det(beta: PolyMap, relations: Sequence[Relation]) -> Polynomial:
    det = determinant([list(row) for row in affine_parts(beta).linear])
    for r in relations:
        det = r.apply(det)
    return det


def _ring_inverse(x: Polynomial, relations: Sequence[Relation]) -> Polynomial:
    """Inverse of ``x`` in Q(i)[t]/(relation) by linear algebra."""
    if x.nvars == 0:
        return Polynomial.constant(0, x.constant_term().inverse())
    if len(relations) != 1 or x.nvars != 1:
        raise ValueError("ring inversion supports a single parameter and relation")
    rel = relations[0]
    n = len(rel.coeffs) - 1 if isinstance(rel, MonicRelation) else rel.n
    t = Polynomial.variable(1, 0)
    cols = [rel.apply(x * t**j) for j in range(n)]
    rows = [[cols[j].coefficient((i,)) for j in range(n)] + [GaussianRational(int(i == 0))] for i in range(n)]
    # Gauss-Jordan
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("element is not invertible")
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = rows[col][col].inverse()
        rows[col] = [v * inv for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return Polynomial(1, {(j,): rows[j][n] for j in range(n)})


def invert_affine(beta: PolyMap, relations: Sequence[Relation] = ()) -> PolyMap:
    """Inverse of an affine map whose coefficients live in the parameter ring."""
    parts = affine_parts(beta)
    k, m = beta.k, beta.nparams
    L = [list(row) for row in parts.linear]
    det = _affine_det(beta, relations)
    dinv = _ring_inverse(det, relations)
    # adjugate
    adj = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            minor = [[L[r][c] for c in range(k) if c != i] for r in range(k) if r != j]
            cof = determinant(minor) if minor else Polynomial.one(m)
            adj[i][j] = cof if (i + j) % 2 == 0 else -cof
    inv = [[adj[i][j] * dinv for j in range(k)] for i in range(k)]
    xs = Polynomial.variables(k + m)[:k]
    comps = []
    for i in range(k):
        acc = Polynomial.zero(k + m)
        for j in range(k):
            acc = acc + inv[i][j].lift(k + m, k) * (xs[j] - parts.translation[j].lift(k + m, k))
        for r in relations:
            acc = r.apply(acc, k)
        comps.append(acc)
    return PolyMap(tuple(comps), names=beta.names, nparams=m)


# ---------------------------------------------------------------------------
# shared iterates


class SearchBudgetExceeded(BudgetExceeded):
    def __init__(self, message: str, frontier: list[tuple[int, int]]):
        super().__init__(message)
        self.frontier = frontier


def degree_pairs(d_f: int, d_g: int, n_max: int) -> list[tuple[int, int]]:
    """(n, m) with d_f^n = d_g^m, lexicographic."""
    return [
        (n, m)
        for n in range(1, n_max + 1)
        for m in range(1, n_max + 1)
        if d_f**n == d_g**m
    ]


def shared_iterate_search(
    F: PolyMap, G: PolyMap, n_max: int, budget: Budget | None = DEFAULT_BUDGET
) -> tuple[int, int] | None:
    """Lexicographically first (n, m) with F^n = G^m, or None."""
    if F.k != G.k:
        raise ValueError("dimension mismatch")
    pairs = degree_pairs(F.degree(), G.degree(), n_max)
    f_iter: dict[int, PolyMap] = {0: identity(F.k)}
    g_iter: dict[int, PolyMap] = {0: identity(G.k)}

    def power(cache, base, n):
        for j in range(len(cache), n + 1):
            cache[j] = compose(base, cache[j - 1], budget)
        return cache[n]

    for idx, (n, m) in enumerate(pairs):
        try:
            fn = power(f_iter, F, n)
            gm = power(g_iter, G, m)
        except BudgetExceeded as exc:
            raise SearchBudgetExceeded(f"budget exceeded at ({n}, {m}): {exc}", pairs[idx:]) from exc
        if fn == gm:
            return n, m
    return None


# ---------------------------------------------------------------------------
# numeric Green-function preservation


@dataclass
class GreenPreservationReport:
    max_residual: float
    max_excess: float
    passed: bool
    samples_used: int
    undecided: int
    tol: float


def check_preserves_green(
    beta,
    F,
    d: int,
    samples: Sequence[Sequence[complex]],
    tol: float = 1e-6,
    opts=None,
) -> GreenPreservationReport:
    """Compare G^+(β z) with G^+(z) on samples.

    ``beta`` is a constant-coefficient PolyMap, a :class:`Member`, or a
    ``(matrix, translation)`` pair. Samples where neither orbit escapes are
    undecided: counted, excluded from the maximum.
    """
    from .green import FloatMap, GreenOptions, green_plus

    opts = opts or GreenOptions()
    fmap = F if isinstance(F, FloatMap) else FloatMap.from_polymap(F)
    if isinstance(beta, Member):
        L, v = beta.numeric()
    elif isinstance(beta, PolyMap):
        L, v = Member(beta, (), "", 1).numeric()
    else:
        L, v = (np.asarray(beta[0], dtype=complex), np.asarray(beta[1], dtype=complex))
    max_res = 0.0
    max_excess = 0.0
    used = undecided = 0
    for z in samples:
        z = np.asarray(z, dtype=complex)
        bz = L @ z + v
        g1 = green_plus(fmap, d, z, opts)
        g2 = green_plus(fmap, d, bz, opts)
        if not g1.escaped and not g2.escaped:
            undecided += 1
            continue
        used += 1
        res = abs(g2.value - g1.value)
        max_res = max(max_res, res)
        max_excess = max(max_excess, res - g1.error_bound - g2.error_bound)
    return GreenPreservationReport(max_res, max(max_excess, 0.0), max_excess <= tol, used, undecided, tol)
