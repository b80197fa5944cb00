"""Exact rational carrier and its text renderings.

All exact values in the package are ``gmpy2.mpq`` instances: arbitrary
precision, always in lowest terms, positive denominator.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational as _RationalABC

import gmpy2
import mpmath
from gmpy2 import mpq

Rational = type(mpq())

DEFAULT_PRECISION = 50


def rational(x) -> mpq:
    """Coerce an int, Fraction, mpq or ``"p/q"`` string to ``mpq``.

    Floats are refused; they would silently import rounding error.
    """
    if isinstance(x, Rational):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational value")
    if isinstance(x, (int, type(gmpy2.mpz()))):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, _RationalABC):
        return mpq(int(x.numerator), int(x.denominator))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def parse_rational(text: str) -> mpq:
    text = text.strip()
    try:
        # gmpy2 parses "p/q" without Python's int string-length cap
        return mpq(text)
    except ValueError:
        raise ValueError(f"not a rational literal: {text!r}") from None


def format_rational(x) -> str:
    """Canonical ``"p/q"`` (or ``"p"`` for integers) in lowest terms."""
    x = rational(x)
    if x.denominator == 1:
        return x.numerator.digits()
    return f"{x.numerator.digits()}/{x.denominator.digits()}"


def to_mpf(x, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    x = rational(x)
    with mpmath.workdps(precision + 10):
        return mpmath.mpf(int(x.numerator)) / int(x.denominator)


def decimal_string(x, precision: int = DEFAULT_PRECISION) -> str:
    """Decimal rendering with ``precision`` significant digits.

    Accepts exact rationals and mpmath reals.
    """
    if isinstance(x, mpmath.mpf):
        value = x
    else:
        value = to_mpf(x, precision)
    if not value:
        return "0." + "0" * (precision - 1)
    with mpmath.workdps(precision + 10):
        return mpmath.nstr(value, precision, strip_zeros=False,
                           min_fixed=-mpmath.inf, max_fixed=mpmath.inf)
