"""Polynomial maps of C^k: composition, iteration, inverses, and regularity."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence

from .poly import (
    DEFAULT_BUDGET,
    Budget,
    GaussianRational,
    Polynomial,
    default_names,
)


class NotHenonSibony(ValueError):
    """The map cannot be a Hénon–Sibony map (e.g. it is affine)."""


class InverseMismatch(ValueError):
    """A claimed inverse does not compose to the identity."""


@dataclass(frozen=True, eq=False)
class PolyMap:
    """A k-tuple of polynomials in k variables.

    ``nparams`` extra trailing variables may be present; they are treated as
    parameters that composition carries along unchanged.
    """

    components: tuple[Polynomial, ...]
    inverse: "PolyMap | None" = None
    names: tuple[str, ...] | None = None
    name: str | None = None
    nparams: int = 0

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("a map needs at least one component")
        k = len(comps)
        for c in comps:
            if c.nvars != k + self.nparams:
                raise ValueError(
                    f"component has {c.nvars} variables, expected {k + self.nparams}"
                )
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))
            if len(self.names) != k:
                raise ValueError("wrong number of variable names")
        if self.inverse is not None and self.inverse.k != k:
            raise ValueError("inverse has a different dimension")

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def nvars(self) -> int:
        return self.k + self.nparams

    def degree(self) -> int:
        return max(c.degree() for c in self.components)

    def variable_names(self) -> list[str]:
        return list(self.names) if self.names else default_names(self.k)

    def with_inverse(self, inverse: "PolyMap | None") -> "PolyMap":
        return PolyMap(self.components, inverse, self.names, self.name, self.nparams)

    def inverted(self) -> "PolyMap":
        """The claimed inverse as a forward map, paired with this map."""
        if self.inverse is None:
            raise InverseMismatch("no inverse supplied")
        return PolyMap(
            self.inverse.components,
            PolyMap(self.components, None, self.names, self.name, self.nparams),
            self.names,
            f"{self.name}^-1" if self.name else None,
            self.inverse.nparams,
        )

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.nparams == other.nparams and self.components == other.components

    def __hash__(self):
        return hash((self.nparams, self.components))

    def __call__(self, point):
        """Exact evaluation at a point of C^k (parameters included if any)."""
        return tuple(c.eval_exact(point) for c in self.components)

    def eval_float(self, point) -> tuple[complex, ...]:
        return tuple(c.eval_float(point) for c in self.components)

    def is_affine(self) -> bool:
        return all(c.degree() <= 1 for c in self.components) if self.nparams == 0 else all(
            all(sum(e[: self.k]) <= 1 for e in c.terms) for c in self.components
        )

    def to_string(self) -> str:
        names = self.variable_names() + [f"p{i + 1}" for i in range(self.nparams)]
        return "(" + ", ".join(c.to_string(names) for c in self.components) + ")"

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"PolyMap{self.to_string()}"


def identity(k: int, nparams: int = 0) -> PolyMap:
    return PolyMap(tuple(Polynomial.variable(k + nparams, i) for i in range(k)), nparams=nparams)


def compose(F: PolyMap, G: PolyMap, budget: Budget | None = DEFAULT_BUDGET) -> PolyMap:
    """``F ∘ G``. Parameter blocks of the two maps are identified."""
    if F.k != G.k:
        raise ValueError(f"dimension mismatch: {F.k} vs {G.k}")
    if F.nparams and G.nparams and F.nparams != G.nparams:
        raise ValueError("parameter blocks differ in size")
    m = max(F.nparams, G.nparams)
    total = F.k + m
    inner = [c if G.nparams == m else c.lift(total) for c in G.components]
    maps = inner + [Polynomial.variable(total, F.k + j) for j in range(F.nparams)]
    comps = tuple(c.substitute(maps, budget) for c in F.components)
    return PolyMap(comps, names=F.names, nparams=m)


def iterate(F: PolyMap, n: int, budget: Budget | None = DEFAULT_BUDGET) -> PolyMap:
    """``F^n``; ``F^0`` is the identity."""
    if n < 0:
        raise ValueError("iterate needs n >= 0")
    result = identity(F.k, F.nparams)
    for _ in range(n):
        result = compose(F, result, budget)
    return PolyMap(result.components, names=F.names, nparams=F.nparams)


def is_identity(F: PolyMap) -> bool:
    return F == identity(F.k, F.nparams)


def composition_degree_bound(F: PolyMap, G: PolyMap) -> int:
    """Largest degree met while expanding ``F ∘ G`` term by term."""
    gdeg = [max(c.degree(), 0) for c in G.components] + [1] * F.nparams
    return max(
        (sum(e * d for e, d in zip(exps, gdeg)) for c in F.components for exps in c.terms),
        default=0,
    )


def verify_inverse(F: PolyMap, G: PolyMap, budget: Budget | None = DEFAULT_BUDGET) -> bool:
    if F.k != G.k:
        raise ValueError("dimension mismatch")
    if budget is not None:
        # fail fast on either order before doing any expansion
        budget.check_degree(composition_degree_bound(F, G))
        budget.check_degree(composition_degree_bound(G, F))
    return is_identity(compose(F, G, budget)) and is_identity(compose(G, F, budget))


def indeterminacy_forms(F: PolyMap) -> tuple[Polynomial, ...]:
    """Top-degree parts of the components attaining the map's degree.

    Their common zeros on the hyperplane at infinity form the indeterminacy
    set of the projective extension. Affine maps give the empty system.
    """
    d = F.degree()
    if d <= 0:
        raise ValueError("constant map has no indeterminacy data")
    if d == 1:
        return ()
    return tuple(c.homogeneous_top() for c in F.components if c.degree() == d)


def _monomials(k: int, degree: int):
    if k == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in _monomials(k - 1, degree - first):
            yield (first,) + rest


class _Echelon:
    """Incremental row echelon form over the Gaussian rationals."""

    def __init__(self):
        self.pivots: dict[tuple, dict] = {}

    def add(self, row: dict) -> bool:
        row = dict(row)
        while row:
            lead = min(row, key=_lead_key)
            piv = self.pivots.get(lead)
            if piv is None:
                inv = row[lead].inverse()
                self.pivots[lead] = {e: c * inv for e, c in row.items()}
                return True
            f = row[lead]
            for e, c in piv.items():
                v = row.get(e, GaussianRational(0)) - f * c
                if v:
                    row[e] = v
                else:
                    row.pop(e, None)
        return False

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _lead_key(e):
    return tuple(-x for x in e)


def projective_disjointness(A: Sequence[Polynomial], B: Sequence[Polynomial]) -> bool:
    """True iff the forms of A and B have only the trivial common zero in C^k.

    Decided by the rank of graded pieces of the generated ideal up to the
    Macaulay bound.
    """
    forms = [f for f in list(A) + list(B) if f]
    if not forms:
        return False
    k = forms[0].nvars
    for f in forms:
        if f.nvars != k or not f.is_homogeneous():
            raise ValueError("expected homogeneous forms in a common number of variables")
    degs = [f.degree() for f in forms]
    if min(degs) == 0:
        return True  # a nonzero constant vanishes nowhere
    bound = sum(degs) - len(degs) + 1
    for D in range(max(degs), max(bound, max(degs)) + 1):
        target = comb(D + k - 1, k - 1)
        ech = _Echelon()
        for f, df in zip(forms, degs):
            for m in _monomials(k, D - df):
                ech.add({tuple(a + b for a, b in zip(e, m)): c for e, c in f.terms.items()})
                if ech.rank == target:
                    return True
    return False


@dataclass
class RegularityReport:
    k: int
    d: int
    delta: int
    s: int | None
    degree_identity_holds: bool
    indeterminacy_disjoint: bool
    iplus_forms: tuple[Polynomial, ...] = field(repr=False)
    iminus_forms: tuple[Polynomial, ...] = field(repr=False)
    names: tuple[str, ...] | None = field(default=None, repr=False)

    @property
    def is_henon_sibony(self) -> bool:
        return self.degree_identity_holds and self.indeterminacy_disjoint

    @property
    def predicted_dim_iplus(self) -> int | None:
        return None if self.s is None else self.k - self.s - 1

    @property
    def predicted_dim_iminus(self) -> int | None:
        return None if self.s is None else self.s - 1

    def to_dict(self) -> dict:
        names = list(self.names) if self.names else default_names(self.k)
        return {
            "k": self.k,
            "d": self.d,
            "delta": self.delta,
            "s": self.s,
            "degree_identity_holds": self.degree_identity_holds,
            "indeterminacy_disjoint": self.indeterminacy_disjoint,
            "henon_sibony": self.is_henon_sibony,
            "iplus_forms": [f.to_string(names) for f in self.iplus_forms],
            "iminus_forms": [f.to_string(names) for f in self.iminus_forms],
            "predicted_dim_iplus": self.predicted_dim_iplus,
            "predicted_dim_iminus": self.predicted_dim_iminus,
        }

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, list):
                value = "; ".join(value)
            elif isinstance(value, bool):
                value = str(value).lower()
            elif value is None:
                value = "none"
            lines.append(f"{key} = {value}")
        return "\n".join(lines)


def degree_identity_exponent(d: int, delta: int, k: int) -> int | None:
    """The integer 1 <= s <= k-1 with d^s = delta^(k-s), if any."""
    for s in range(1, k):
        if d**s == delta ** (k - s):
            return s
    return None


def regularity_report(F: PolyMap, budget: Budget | None = DEFAULT_BUDGET) -> RegularityReport:
    if F.inverse is None:
        raise InverseMismatch("regularity needs a claimed inverse")
    if not verify_inverse(F, F.inverse, budget):
        raise InverseMismatch("claimed inverse does not compose to the identity")
    d = F.degree()
    delta = F.inverse.degree()
    if d <= 1 or delta <= 1:
        raise NotHenonSibony("degree 1, not Hénon–Sibony")
    k = F.k
    s = degree_identity_exponent(d, delta, k)
    iplus = indeterminacy_forms(F)
    iminus = indeterminacy_forms(F.inverse)
    return RegularityReport(
        k=k,
        d=d,
        delta=delta,
        s=s,
        degree_identity_holds=s is not None,
        indeterminacy_disjoint=projective_disjointness(iplus, iminus),
        iplus_forms=iplus,
        iminus_forms=iminus,
        names=F.names,
    )
