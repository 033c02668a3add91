"""Exact rational arithmetic used everywhere in this package.

All stoichiometry, matrix algebra, LP pivoting and witness verification is
done over the rationals; no floats are ever compared.  gmpy2.mpq is used
when available (roughly an order of magnitude faster than
fractions.Fraction), with Fraction as a drop-in fallback.
"""

from __future__ import annotations

from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq

    RAT = _mpq
except ImportError:  # pragma: no cover - exercised only without gmpy2
    RAT = Fraction

Rat = object  # loose alias used in annotations; values are RAT instances

ZERO = RAT(0)
ONE = RAT(1)


def rat(value, denom=None):
    """Coerce ``value`` (int, str like '3/4', Fraction, mpq) to the exact type.

    Floats are rejected: every number entering the classifier must be exact.
    """
    if denom is not None:
        return RAT(value) / RAT(denom)
    if isinstance(value, RAT):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not allowed; pass an int, Fraction or 'p/q' string")
    if isinstance(value, str):
        return RAT(Fraction(value.strip()))
    return RAT(value)


def rat_str(q) -> str:
    """Canonical 'p' or 'p/q' rendering."""
    q = rat(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def as_fraction(q) -> Fraction:
    q = rat(q)
    return Fraction(int(q.numerator), int(q.denominator))


def dot(u, v):
    """Exact dot product of two equal-length sequences."""
    s = ZERO
    for a, b in zip(u, v):
        if a and b:
            s += a * b
    return s
