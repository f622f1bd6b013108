"""Number handling shared by every module.

Values are either ``float`` (default build) or ``fractions.Fraction`` (exact
mode).  Comparisons are exact when no float is involved and otherwise use a
relative tolerance of ``EPS_REL`` with an absolute floor of ``EPS_ABS``.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Number = Union[int, float, Fraction]

EPS_REL = 1e-9
EPS_ABS = 1e-12


def is_exact(*values) -> bool:
    return not any(isinstance(v, float) for v in values)


def tolerance(a: Number, b: Number) -> float:
    if is_exact(a, b):
        return 0
    return EPS_ABS + EPS_REL * max(abs(a), abs(b))


def _infinite(*values) -> bool:
    return any(isinstance(v, float) and math.isinf(v) for v in values)


def approx_eq(a: Number, b: Number) -> bool:
    if _infinite(a, b):
        return a == b
    return abs(a - b) <= tolerance(a, b)


def approx_ge(a: Number, b: Number) -> bool:
    if _infinite(a, b):
        return a >= b
    return a >= b - tolerance(a, b)


def approx_le(a: Number, b: Number) -> bool:
    return approx_ge(b, a)


def approx_gt(a: Number, b: Number) -> bool:
    """Strictly greater by more than the tolerance."""
    return not approx_le(a, b)


def approx_lt(a: Number, b: Number) -> bool:
    return not approx_ge(a, b)


def is_zero(x: Number, scale: Number = 1) -> bool:
    if is_exact(x):
        return x == 0
    return abs(x) <= EPS_ABS + EPS_REL * abs(scale)


def to_exact(x) -> Fraction:
    """Parse a number or numeric string into a Fraction without rounding."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a number")
    if isinstance(x, (int, float, str)):
        return Fraction(x)
    raise TypeError(f"not a number: {x!r}")


def to_float(x) -> float:
    if isinstance(x, str):
        return float(Fraction(x))
    return float(x)


def format_number(x: Number):
    """JSON-friendly rendering: floats stay numbers, fractions become strings.

    Fractions with a finite decimal expansion are written as decimals, others
    as ``"p/q"``; both forms parse back exactly.
    """
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        d = x.denominator
        twos = fives = 0
        while d % 2 == 0:
            d //= 2
            twos += 1
        while d % 5 == 0:
            d //= 5
            fives += 1
        if d == 1:
            places = max(twos, fives)
            scaled = abs(x.numerator) * (10**places // x.denominator)
            sign = "-" if x < 0 else ""
            digits = str(scaled).rjust(places + 1, "0")
            return f"{sign}{digits[:-places]}.{digits[-places:]}".rstrip("0").rstrip(".")
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return x
    return float(x)
