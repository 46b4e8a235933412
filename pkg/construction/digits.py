"""
Certified decimal digits of a bracket.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from interval import BigInterval, to_fraction

MAX_DIGITS = 100_000

Endpoint = Union[str, Fraction, int]


@dataclass(frozen=True)
class DigitExtraction:
    """Longest decimal prefix shared by every real in the bracket."""

    digits: str
    integer_decided: bool
    fraction_digits: int


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (str, int)):
        return Fraction(value)
    return to_fraction(value)


def extract_digits(lo: Union[BigInterval, Endpoint], hi: Optional[Endpoint] = None) -> DigitExtraction:
    """
    Digits D such that every real in [lo, hi] truncates to a decimal
    expansion starting with D.

    ``extract_digits(BigInterval)`` and ``extract_digits("1.2", "1.3")`` are
    both accepted. A bracket straddling an integer yields ``""`` with
    ``integer_decided`` False.
    """
    if isinstance(lo, BigInterval):
        lo, hi = lo.lo, lo.hi
    if hi is None:
        raise TypeError("extract_digits needs a bracket or both endpoints")
    low, high = _as_fraction(lo), _as_fraction(hi)
    if low > high:
        raise ValueError("bracket endpoints are reversed")

    whole = low.numerator // low.denominator
    if whole != high.numerator // high.denominator:
        return DigitExtraction("", False, 0)

    digits = []
    scale = 1
    while len(digits) < MAX_DIGITS:
        scale *= 10
        a = math.floor(low * scale)
        b = math.floor(high * scale)
        if a != b:
            break
        digits.append(str(a % 10))
        if low == high and (low * scale).denominator == 1:
            break
    text = f"{whole}." + "".join(digits)
    return DigitExtraction(text, True, len(digits))
