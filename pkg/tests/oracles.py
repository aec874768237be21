"""Independent big-float reference for G^+ (mpmath, no shared code path with
the double-precision engine beyond reading polynomial coefficients)."""

from __future__ import annotations

import mpmath

ORACLE_BITS = 200
ORACLE_STEPS = 60


def _mp_terms(F):
    out = []
    for comp in F.components:
        terms = []
        for exps, c in comp.terms.items():
            coef = mpmath.mpc(mpmath.mpf(c.re.numerator) / c.re.denominator,
                              mpmath.mpf(c.im.numerator) / c.im.denominator)
            terms.append((coef, exps))
        out.append(terms)
    return out


def green_oracle(F, d: int, z, steps: int = ORACLE_STEPS, bits: int = ORACLE_BITS) -> float:
    """max(log ||F^steps(z)||, 0) / d^steps at ``bits`` of working precision."""
    with mpmath.workprec(bits):
        comps = _mp_terms(F)
        w = [mpmath.mpc(complex(x)) for x in z]
        for _ in range(steps):
            new = []
            for terms in comps:
                acc = mpmath.mpc(0)
                for coef, exps in terms:
                    t = coef
                    for x, e in zip(w, exps):
                        if e:
                            t *= x**e
                    acc += t
                new.append(acc)
            w = new
        norm = mpmath.sqrt(mpmath.fsum(abs(x) ** 2 for x in w))
        if norm == 0:
            return 0.0
        return float(max(mpmath.log(norm), 0) / mpmath.mpf(d) ** steps)
