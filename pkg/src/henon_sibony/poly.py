"""Exact Gaussian-rational scalars and sparse multivariate polynomials.

Polynomials are immutable. Terms are stored as ``{exponent tuple: coefficient}``
with no zero coefficients, so structural equality is mathematical equality.
Parametric polynomials (coefficients that are themselves polynomials in solver
unknowns) are represented flat: the first ``k`` variables are the map
variables and the trailing block holds the parameters. ``split`` recovers the
nested view.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            re, im = re.re, re.im + Fraction(im)
        if isinstance(re, (float, complex)) or isinstance(im, (float, complex)):
            raise TypeError("floating-point values are not exact; pass int or Fraction")
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> "GaussianRational":
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    @staticmethod
    def coerce(x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational._raw(Fraction(x), _ZERO)
        raise TypeError(f"cannot use {type(x).__name__} as an exact scalar")

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        if not self.im and not o.im:
            return GaussianRational._raw(self.re * o.re, _ZERO)
        return GaussianRational._raw(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._raw(self.re, -self.im)

    def inverse(self) -> "GaussianRational":
        n = self.norm()
        if not n:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational._raw(self.re / n, -self.im / n)

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = _ONE_G
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    @property
    def is_real(self) -> bool:
        return not self.im

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if self.im == 1:
            im = "i"
        elif self.im == -1:
            im = "-i"
        else:
            im = f"{self.im}*i"
        if not self.re:
            return im
        if im.startswith("-"):
            return f"{self.re}{im}"
        return f"{self.re}+{im}"


_ZERO = Fraction(0)
_ONE_G = GaussianRational._raw(Fraction(1), _ZERO)
I = GaussianRational._raw(_ZERO, Fraction(1))

Scalar = Union[int, Fraction, GaussianRational]
Exponents = tuple


class BudgetExceeded(RuntimeError):
    """Raised when a symbolic computation would exceed its degree or term budget."""

    def __init__(self, message: str, *, degree: int | None = None, terms: int | None = None):
        super().__init__(message)
        self.degree = degree
        self.terms = terms


@dataclass(frozen=True)
class Budget:
    max_degree: int = 256
    max_terms: int = 10**6

    def check_degree(self, degree: int) -> None:
        if degree > self.max_degree:
            raise BudgetExceeded(
                f"degree {degree} exceeds budget {self.max_degree}", degree=degree
            )

    def check_terms(self, terms: int) -> None:
        if terms > self.max_terms:
            raise BudgetExceeded(
                f"{terms} terms exceeds budget {self.max_terms}", terms=terms
            )


DEFAULT_BUDGET = Budget()


def _graded_lex_key(exps: tuple) -> tuple:
    # sort ascending on this key gives descending graded-lex order
    return (-sum(exps), tuple(-e for e in exps))


def _to_gaussian_ints(terms: Mapping[tuple, GaussianRational]):
    """Common-denominator form: (den, [(exps, re_num, im_num)], all_real)."""
    den = 1
    all_real = True
    for c in terms.values():
        den = lcm(den, c.re.denominator, c.im.denominator)
        if c.im:
            all_real = False
    out = []
    for e, c in terms.items():
        r = c.re.numerator * (den // c.re.denominator)
        s = c.im.numerator * (den // c.im.denominator)
        out.append((e, r, s))
    return den, out, all_real


def _mul_terms(a: Mapping, b: Mapping, nvars: int) -> dict:
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    # Kronecker packing: exponent vectors become ints and multiply by adding
    top = 0
    for e in a:
        for x in e:
            if x > top:
                top = x
    top_b = 0
    for e in b:
        for x in e:
            if x > top_b:
                top_b = x
    bits = (top + top_b).bit_length() + 1
    mask = (1 << bits) - 1
    shifts = [bits * i for i in range(nvars)]

    def pack(e):
        key = 0
        for x, s in zip(e, shifts):
            key |= x << s
        return key

    den_a, ta, real_a = _to_gaussian_ints(a)
    den_b, tb, real_b = _to_gaussian_ints(b)
    pa = [(pack(e), r, s) for e, r, s in ta]
    pb = [(pack(e), r, s) for e, r, s in tb]
    den = Fraction(1, den_a * den_b)
    out: dict = {}
    if real_a and real_b:
        acc: dict = {}
        get = acc.get
        for ka, ra, _ in pa:
            for kb, rb, _ in pb:
                k = ka + kb
                acc[k] = get(k, 0) + ra * rb
        for k, v in acc.items():
            if v:
                e = tuple((k >> s) & mask for s in shifts)
                out[e] = GaussianRational._raw(v * den, _ZERO)
        return out
    acc_r: dict = {}
    acc_i: dict = {}
    gr = acc_r.get
    gi = acc_i.get
    for ka, ra, sa in pa:
        for kb, rb, sb in pb:
            k = ka + kb
            acc_r[k] = gr(k, 0) + ra * rb - sa * sb
            acc_i[k] = gi(k, 0) + ra * sb + sa * rb
    for k, v in acc_r.items():
        w = acc_i[k]
        if v or w:
            e = tuple((k >> s) & mask for s in shifts)
            out[e] = GaussianRational._raw(v * den, w * den)
    return out


class Polynomial:
    """Sparse polynomial over the Gaussian rationals in ``nvars`` variables."""

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping | Iterable = ()):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        self.nvars = nvars
        clean: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for exps, c in items:
            exps = tuple(int(x) for x in exps)
            if len(exps) != nvars:
                raise ValueError(f"exponent vector {exps} does not have length {nvars}")
            if any(x < 0 for x in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = GaussianRational.coerce(c)
            if exps in clean:
                c = clean[exps] + c
            clean[exps] = c
        self._terms = {e: c for e, c in clean.items() if c}
        self._hash = None

    @classmethod
    def _make(cls, nvars: int, terms: dict) -> "Polynomial":
        # trusted constructor: terms already canonical
        obj = object.__new__(cls)
        obj.nvars = nvars
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls._make(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c: Scalar) -> "Polynomial":
        c = GaussianRational.coerce(c)
        return cls._make(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def one(cls, nvars: int) -> "Polynomial":
        return cls.constant(nvars, 1)

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Polynomial":
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} out of range for {nvars} variables")
        e = [0] * nvars
        e[index] = 1
        return cls._make(nvars, {tuple(e): _ONE_G})

    @classmethod
    def variables(cls, nvars: int) -> list["Polynomial"]:
        return [cls.variable(nvars, i) for i in range(nvars)]

    @classmethod
    def monomial(cls, exps: Sequence[int], c: Scalar = 1) -> "Polynomial":
        return cls(len(exps), {tuple(exps): c})

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> Mapping[tuple, GaussianRational]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def sorted_terms(self) -> list[tuple[tuple, GaussianRational]]:
        """Terms in graded lexicographic order, highest first."""
        return sorted(self._terms.items(), key=lambda t: _graded_lex_key(t[0]))

    def coefficient(self, exps: Sequence[int]) -> GaussianRational:
        return self._terms.get(tuple(exps), GaussianRational._raw(_ZERO, _ZERO))

    def degree(self) -> int:
        """Total degree; the zero polynomial has degree -1."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def degree_in(self, index: int) -> int:
        if not self._terms:
            return -1
        return max(e[index] for e in self._terms)

    def homogeneous_top(self) -> "Polynomial":
        if not self._terms:
            raise ValueError("homogeneous_top of the zero polynomial")
        d = self.degree()
        return Polynomial._make(
            self.nvars, {e: c for e, c in self._terms.items() if sum(e) == d}
        )

    def homogeneous_part(self, degree: int) -> "Polynomial":
        return Polynomial._make(
            self.nvars, {e: c for e, c in self._terms.items() if sum(e) == degree}
        )

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_term(self) -> GaussianRational:
        return self.coefficient((0,) * self.nvars)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def support(self) -> set[int]:
        """Indices of variables that occur."""
        out = set()
        for e in self._terms:
            out.update(i for i, x in enumerate(e) if x)
        return out

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Polynomial") -> None:
        if other.nvars != self.nvars:
            raise ValueError(
                f"variable-count mismatch: {self.nvars} vs {other.nvars}"
            )

    def _lift_scalar(self, other) -> "Polynomial | None":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, GaussianRational)):
            return Polynomial.constant(self.nvars, other)
        return None

    def __add__(self, other):
        o = self._lift_scalar(other)
        if o is None:
            return NotImplemented
        if len(o._terms) > len(self._terms):
            big, small = o._terms, self._terms
        else:
            big, small = self._terms, o._terms
        out = dict(big)
        for e, c in small.items():
            if e in out:
                s = out[e] + c
                if s:
                    out[e] = s
                else:
                    del out[e]
            else:
                out[e] = c
        return Polynomial._make(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._make(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        o = self._lift_scalar(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            c = GaussianRational.coerce(other)
            if not c:
                return Polynomial.zero(self.nvars)
            return Polynomial._make(self.nvars, {e: v * c for e, v in self._terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        return Polynomial._make(self.nvars, _mul_terms(self._terms, other._terms, self.nvars))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers need a non-negative integer exponent")
        result = Polynomial.one(self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    # -- substitution and evaluation -------------------------------------

    def substitute(
        self, maps: Sequence["Polynomial"], budget: Budget | None = DEFAULT_BUDGET
    ) -> "Polynomial":
        """Replace variable ``i`` by ``maps[i]`` and expand.

        All ``maps`` must share one ``nvars``; the result lives there.
        """
        if len(maps) != self.nvars:
            raise ValueError(f"arity mismatch: {len(maps)} maps for {self.nvars} variables")
        if not maps:
            return self
        target = maps[0].nvars
        if any(m.nvars != target for m in maps):
            raise ValueError("substitution maps must share a common nvars")
        if budget is not None and self._terms:
            mdeg = [max(m.degree(), 0) for m in maps]
            budget.check_degree(max(sum(x * d for x, d in zip(e, mdeg)) for e in self._terms))
        powers: list[list[Polynomial]] = [[Polynomial.one(target)] for _ in maps]

        def power(i: int, n: int) -> Polynomial:
            cache = powers[i]
            while len(cache) <= n:
                cache.append(cache[-1] * maps[i])
                if budget is not None:
                    budget.check_terms(len(cache[-1]))
            return cache[n]

        def rec(terms: list, var: int) -> Polynomial:
            if var == self.nvars:
                c = sum((c for _, c in terms), GaussianRational._raw(_ZERO, _ZERO))
                return Polynomial.constant(target, c)
            groups: dict[int, list] = {}
            for e, c in terms:
                groups.setdefault(e[var], []).append((e, c))
            acc = Polynomial.zero(target)
            for j in sorted(groups):
                part = rec(groups[j], var + 1)
                if j:
                    part = part * power(var, j)
                acc = acc + part
                if budget is not None:
                    budget.check_terms(len(acc))
            return acc

        return rec(list(self._terms.items()), 0)

    def eval_exact(self, point: Sequence[Scalar]) -> GaussianRational:
        if len(point) != self.nvars:
            raise ValueError(f"arity mismatch: point has {len(point)} coordinates, expected {self.nvars}")
        z = [GaussianRational.coerce(x) for x in point]
        total = GaussianRational._raw(_ZERO, _ZERO)
        for e, c in self._terms.items():
            t = c
            for x, n in zip(z, e):
                if n:
                    t = t * x**n
            total = total + t
        return total

    def eval_float(self, point: Sequence[complex]) -> complex:
        """Evaluate in complex doubles.

        Terms are summed in graded-lex order (highest first); each term is
        ``coef * prod(z_i ** e_i)`` taken left to right over the variables.
        """
        if len(point) != self.nvars:
            raise ValueError(f"arity mismatch: point has {len(point)} coordinates, expected {self.nvars}")
        z = [complex(x) for x in point]
        total = 0j
        for e, c in self.sorted_terms():
            t = complex(c)
            for x, n in zip(z, e):
                if n:
                    t *= x**n
            total += t
        return total

    # -- variable blocks --------------------------------------------------

    def lift(self, nvars: int, offset: int = 0) -> "Polynomial":
        """Embed into ``nvars`` variables, placing ours at ``offset``."""
        if offset < 0 or offset + self.nvars > nvars:
            raise ValueError("lift target too small")
        pre = (0,) * offset
        post = (0,) * (nvars - offset - self.nvars)
        return Polynomial._make(nvars, {pre + e + post: c for e, c in self._terms.items()})

    def split(self, k: int) -> dict[tuple, "Polynomial"]:
        """View as a polynomial in the first ``k`` variables whose
        coefficients are polynomials in the remaining ones."""
        out: dict[tuple, dict] = {}
        for e, c in self._terms.items():
            out.setdefault(e[:k], {})[e[k:]] = c
        m = self.nvars - k
        return {head: Polynomial._make(m, tail) for head, tail in out.items()}

    @classmethod
    def join(cls, parts: Mapping[tuple, "Polynomial"], k: int, m: int) -> "Polynomial":
        """Inverse of ``split``."""
        out = {}
        for head, coeff in parts.items():
            for tail, c in coeff._terms.items():
                out[tuple(head) + tail] = c
        return cls._make(k + m, out)

    def drop_trailing(self, nvars: int) -> "Polynomial":
        """Restrict to the first ``nvars`` variables; the rest must not occur."""
        out = {}
        for e, c in self._terms.items():
            if any(e[nvars:]):
                raise ValueError("trailing variables occur in polynomial")
            out[e[:nvars]] = c
        return Polynomial._make(nvars, out)

    def map_coefficients(self, fn) -> "Polynomial":
        out = {}
        for e, c in self._terms.items():
            v = GaussianRational.coerce(fn(c))
            if v:
                out[e] = v
        return Polynomial._make(self.nvars, out)

    def content_normalized(self) -> "Polynomial":
        """Scale so the leading graded-lex coefficient is 1."""
        if not self._terms:
            return self
        lead = self.sorted_terms()[0][1]
        return self * lead.inverse()

    # -- text -------------------------------------------------------------

    def to_string(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = default_names(self.nvars)
        if len(names) != self.nvars:
            raise ValueError("wrong number of variable names")
        if not self._terms:
            return "0"
        pieces: list[str] = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                (n if x == 1 else f"{n}^{x}") for n, x in zip(names, e) if x
            )
            neg = c.is_real and c.re < 0
            mag = -c if neg else c
            if not mono:
                coef = str(mag) if mag.is_real else f"({mag})"
                body = coef
            elif mag == 1:
                body = mono
            else:
                coef = str(mag) if mag.is_real else f"({mag})"
                body = f"{coef}*{mono}"
            if not pieces:
                pieces.append(f"-{body}" if neg else body)
            else:
                pieces.append(f" - {body}" if neg else f" + {body}")
        return "".join(pieces)

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"Polynomial({self.nvars}, {self.to_string()!r})"


def default_names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


def reduce_power(p: Polynomial, index: int, n: int, c: Scalar) -> Polynomial:
    """Rewrite using the relation ``v^n = c`` for variable ``index``."""
    if n < 1:
        raise ValueError("relation exponent must be positive")
    c = GaussianRational.coerce(c)
    out: dict = {}
    for e, coef in p.terms.items():
        q, r = divmod(e[index], n)
        if q:
            if not c:
                continue
            coef = coef * c**q
            e = e[:index] + (r,) + e[index + 1:]
        if e in out:
            s = out[e] + coef
            if s:
                out[e] = s
            else:
                del out[e]
        else:
            out[e] = coef
    return Polynomial._make(p.nvars, out)


def reduce_monic(p: Polynomial, index: int, modulus: Sequence[Scalar]) -> Polynomial:
    """Reduce modulo a monic univariate polynomial in variable ``index``.

    ``modulus`` lists coefficients from the constant term up; the last one
    must be 1.
    """
    coeffs = [GaussianRational.coerce(c) for c in modulus]
    deg = len(coeffs) - 1
    if deg < 1 or coeffs[-1] != 1:
        raise ValueError("modulus must be monic of positive degree")
    work = dict(p.terms)
    while True:
        high = [e for e in work if e[index] >= deg]
        if not high:
            return Polynomial._make(p.nvars, work)
        e = max(high, key=lambda x: x[index])
        coef = work.pop(e)
        shift = e[index] - deg
        for j, m in enumerate(coeffs[:-1]):
            if not m:
                continue
            f = e[:index] + (shift + j,) + e[index + 1:]
            v = work.get(f, GaussianRational._raw(_ZERO, _ZERO)) - coef * m
            if v:
                work[f] = v
            else:
                work.pop(f, None)
