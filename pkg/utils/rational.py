"""
Exact rational parameters: parsing, canonical rendering, exact powers.
"""
from fractions import Fraction
from typing import Optional, Union

import gmpy2

from utils.errors import FamilySpecError

Rational = Union[int, Fraction]


def parse_rational(text: str) -> Fraction:
    """Parse ``2``, ``1.5``, ``2/3`` or ``1e-3`` into an exact Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise FamilySpecError(f"not a rational number: {text!r}") from None


def format_rational(q: Rational) -> str:
    """
    Canonical string for an exact rational.

    Integers print plainly, terminating decimals as decimals and everything
    else as ``p/q``, so ``parse_rational(format_rational(q)) == q``.
    """
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    places = max(twos, fives)
    scaled = abs(q.numerator) * (10 ** places) // q.denominator
    sign = "-" if q < 0 else ""
    digits = str(scaled).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def exact_root(value: int, index: int) -> Optional[int]:
    """The integer index-th root of value, or None if it is not exact."""
    if value < 0:
        return None
    root, exact = gmpy2.iroot(gmpy2.mpz(value), index)
    return int(root) if exact else None


def exact_power(base: Rational, exponent: Fraction, max_bits: int) -> Optional[Fraction]:
    """
    base**exponent as an exact rational when it is one, else None.

    Only non-negative exponents are handled; None is also returned when the
    result would exceed ``max_bits``.
    """
    base = Fraction(base)
    exponent = Fraction(exponent)
    if exponent < 0 or base < 0:
        return None
    if base == 0:
        return Fraction(0) if exponent > 0 else Fraction(1)
    p, q = exponent.numerator, exponent.denominator
    num = exact_root(base.numerator, q)
    den = exact_root(base.denominator, q)
    if num is None or den is None:
        return None
    size = max(num.bit_length(), den.bit_length()) * p
    if size > max_bits:
        return None
    return Fraction(num ** p, den ** p)


def exact_integer_power(base: Rational, exponent: Fraction, max_bits: int) -> Optional[int]:
    """Like ``exact_power`` but only for integral results."""
    value = exact_power(base, exponent, max_bits)
    if value is None or value.denominator != 1:
        return None
    return value.numerator
