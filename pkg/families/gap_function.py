"""
Gap functions g: the nondecreasing bound u_{n+1} - u_n <= g(u_n) - 1.

Every kind is nondecreasing on the whole real line, so an enclosure of g
over an interval is the hull of g at its two endpoints.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

import gmpy2
import numpy as np

from interval import (
    BigInterval,
    from_fraction,
    from_integer,
    ln,
    ln2,
    mul,
    point,
    pow_real,
)
from utils.errors import FamilySpecError
from utils.rational import format_rational, parse_rational


class GapKind(str, Enum):
    POWER = "pow"
    LINEAR_LOG2 = "linear-log2"
    LOG_POWER = "logpow"
    CONSTANT = "const"


@dataclass(frozen=True)
class GapFunction:
    """
    One of four gap function shapes.

    POWER: x**r for x > 0, else 0 (r > 0).
    LINEAR_LOG2: (log 2) * x.
    LOG_POWER: c * (log x)**k + offset for x > 1, else offset.
    CONSTANT: value everywhere.
    """

    kind: GapKind
    exponent: Fraction = Fraction(1)
    c: Fraction = Fraction(1)
    k: Fraction = Fraction(1)
    offset: Fraction = Fraction(0)
    value: Fraction = Fraction(0)

    # --- constructors -------------------------------------------------------

    @classmethod
    def power(cls, r) -> "GapFunction":
        r = Fraction(r)
        if r <= 0:
            raise FamilySpecError("power gap function needs a positive exponent")
        return cls(GapKind.POWER, exponent=r)

    @classmethod
    def power_two_thirds(cls) -> "GapFunction":
        return cls.power(Fraction(2, 3))

    @classmethod
    def linear_log2(cls) -> "GapFunction":
        return cls(GapKind.LINEAR_LOG2)

    @classmethod
    def log_power(cls, c, k, offset=0) -> "GapFunction":
        c, k = Fraction(c), Fraction(k)
        if c < 0 or k <= 0:
            raise FamilySpecError("log-power gap function needs c >= 0 and k > 0")
        return cls(GapKind.LOG_POWER, c=c, k=k, offset=Fraction(offset))

    @classmethod
    def constant(cls, value) -> "GapFunction":
        return cls(GapKind.CONSTANT, value=Fraction(value))

    # --- evaluation ---------------------------------------------------------

    def _at(self, x: "gmpy2.mpfr", precision: int) -> BigInterval:
        """Enclosure of g at a single mpfr point."""
        if self.kind == GapKind.CONSTANT:
            return from_fraction(self.value, precision)
        if self.kind == GapKind.LINEAR_LOG2:
            return mul(ln2(precision), point(x, precision))
        if self.kind == GapKind.POWER:
            if x <= 0:
                return from_integer(0, precision)
            if not gmpy2.is_finite(x):
                return point(x, precision)
            return pow_real(point(x, precision), from_fraction(self.exponent, precision))

        offset = from_fraction(self.offset, precision)
        if x <= 1:
            return offset
        if not gmpy2.is_finite(x):
            return BigInterval(offset.lo, x, precision)
        log_x = ln(point(x, precision))
        c = from_fraction(self.c, precision)
        k = from_fraction(self.k, precision)
        if log_x.lo <= 0:
            upper = mul(c, pow_real(point(log_x.hi, precision), k)) + offset
            return BigInterval(offset.lo, upper.hi, precision)
        return mul(c, pow_real(log_x, k)) + offset

    def evaluate(self, x: BigInterval) -> BigInterval:
        """Certified enclosure of g over x."""
        p = x.precision
        low = self._at(x.lo, p)
        if x.is_point():
            return low
        high = self._at(x.hi, p)
        return BigInterval(low.lo, high.hi, p)

    def evaluate_array(self, x: np.ndarray) -> np.ndarray:
        """Float64 evaluation used to screen large scans."""
        x = np.asarray(x, dtype=np.float64)
        if self.kind == GapKind.CONSTANT:
            return np.full_like(x, float(self.value))
        if self.kind == GapKind.LINEAR_LOG2:
            return np.log(2.0) * x
        if self.kind == GapKind.POWER:
            return np.where(x > 0, np.abs(x) ** float(self.exponent), 0.0)
        safe = np.where(x > 1, x, 2.0)
        logs = np.where(x > 1, float(self.c) * np.log(safe) ** float(self.k), 0.0)
        return logs + float(self.offset)

    # --- mini-language ------------------------------------------------------

    def spec(self) -> str:
        if self.kind == GapKind.POWER:
            return f"pow:{format_rational(self.exponent)}"
        if self.kind == GapKind.LINEAR_LOG2:
            return "linear-log2"
        if self.kind == GapKind.CONSTANT:
            return f"const:{format_rational(self.value)}"
        return (f"logpow:c={format_rational(self.c)},k={format_rational(self.k)},"
                f"offset={format_rational(self.offset)}")

    def __str__(self) -> str:
        return self.spec()

    @classmethod
    def parse(cls, text: str) -> "GapFunction":
        """
        Parse ``pow:2/3``, ``linear``, ``linear-log2``, ``const:5`` or
        ``logpow:c=..,k=..,offset=..``.
        """
        name, _, rest = text.strip().partition(":")
        name = name.strip().lower()
        if name == "linear" and not rest:
            return cls.power(1)
        if name == "linear-log2" and not rest:
            return cls.linear_log2()
        if name == "pow":
            return cls.power(parse_rational(rest))
        if name == "const":
            return cls.constant(parse_rational(rest))
        if name == "logpow":
            params = _parse_pairs(rest, {"c", "k", "offset"})
            if "k" not in params:
                raise FamilySpecError("logpow needs k=")
            return cls.log_power(
                params.get("c", Fraction(1)), params["k"], params.get("offset", Fraction(0))
            )
        raise FamilySpecError(f"unknown gap function '{text}'")


def _parse_pairs(text: str, allowed: set, context: Optional[str] = None) -> dict:
    """``key=value,...`` into Fractions, rejecting unknown keys."""
    params = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep:
            raise FamilySpecError(f"expected key=value, got '{item}'")
        if key not in allowed:
            where = f" for {context}" if context else ""
            raise FamilySpecError(f"unknown key '{key}'{where}")
        params[key] = parse_rational(value)
    return params
