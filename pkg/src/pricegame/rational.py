"""Exact rational values and small number-theoretic helpers.

All money amounts in this package are `fractions.Fraction`. Equilibria live on
measure-zero tie sets, so binary floats are rejected everywhere: a price that
is "almost" equal to a marginal value breaks the demand correspondence.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Union

Value = Fraction

Rationalish = Union[Fraction, int, str]


def as_value(x: Rationalish) -> Fraction:
    """Coerce an int, Fraction, or exact string ("3/4", "1.27") to a Fraction.

    Floats are refused: pass the literal as a string instead.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a value")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not an exact rational: {x!r}") from exc
    if isinstance(x, float):
        raise TypeError(
            f"refusing float {x!r}: floats are inexact; pass '{x}' as a string"
        )
    raise TypeError(f"cannot interpret {type(x).__name__} as an exact value")


def value_str(x: Fraction) -> str:
    """Canonical string form, round-trippable through as_value."""
    return str(x)


def harmonic_number(k: int) -> Fraction:
    """H_k = 1 + 1/2 + ... + 1/k, exactly. H_0 = 0."""
    if k < 0:
        raise ValueError("harmonic_number needs k >= 0")
    return sum((Fraction(1, j) for j in range(1, k + 1)), Fraction(0))


def common_denominator(values: Iterable[Fraction]) -> int:
    """lcm of the denominators, i.e. the grid all the values live on."""
    den = 1
    for v in values:
        den = lcm(den, v.denominator)
    return den
