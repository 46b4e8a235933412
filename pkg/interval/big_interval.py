"""
Arbitrary-precision interval arithmetic with outward rounding.

Endpoints are gmpy2 ``mpfr`` values. Every operation evaluates its lower
endpoint under ``RoundDown`` and its upper endpoint under ``RoundUp`` in a
fresh MPFR context, so the result always encloses the exact value whenever
the operands enclose theirs. MPFR rounds every supported function correctly,
which makes directed rounding sufficient for containment.
"""
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Tuple, Union

import gmpy2
from gmpy2 import mpfr

from utils.errors import DivisionByIntervalContainingZero, DomainError

_EMAX = gmpy2.get_emax_max()
_EMIN = gmpy2.get_emin_min()

IntLike = Union[int, "gmpy2.mpz"]


def _context(precision: int, rounding):
    """MPFR context with the widest exponent range and no traps."""
    return gmpy2.context(
        precision=precision,
        round=rounding,
        emax=_EMAX,
        emin=_EMIN,
        subnormalize=False,
    )


def _down(precision: int, fn: Callable, *args):
    with _context(precision, gmpy2.RoundDown):
        return fn(*args)


def _up(precision: int, fn: Callable, *args):
    with _context(precision, gmpy2.RoundUp):
        return fn(*args)


class CertifiedOrder(str, Enum):
    """Outcome of a certified comparison."""

    LESS = "CertainlyLess"
    GREATER = "CertainlyGreater"
    EQUAL = "CertainlyEqual"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class BigInterval:
    """Closed interval [lo, hi] with mpfr endpoints at ``precision`` bits."""

    lo: "mpfr"
    hi: "mpfr"
    precision: int

    def __post_init__(self):
        if gmpy2.is_nan(self.lo) or gmpy2.is_nan(self.hi):
            raise DomainError("interval endpoint is NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    # --- inspection ---------------------------------------------------------

    def is_point(self) -> bool:
        return self.lo == self.hi

    def is_finite(self) -> bool:
        return gmpy2.is_finite(self.lo) and gmpy2.is_finite(self.hi)

    def contains(self, value) -> bool:
        """Exact membership test for an int, Fraction, mpfr or interval."""
        if isinstance(value, BigInterval):
            return self.lo <= value.lo and value.hi <= self.hi
        if isinstance(value, Fraction):
            return (to_fraction(self.lo) <= value <= to_fraction(self.hi))
        return self.lo <= value <= self.hi

    def width(self) -> "mpfr":
        return _up(self.precision, lambda: self.hi - self.lo)

    def midpoint(self) -> "mpfr":
        with _context(self.precision + 1, gmpy2.RoundToNearest):
            return (self.lo + self.hi) / 2

    def integer_value(self):
        """The exact integer this interval pins down, or None."""
        if self.is_point() and gmpy2.is_integer(self.lo):
            return floor_mpfr(self.lo)
        return None

    def with_precision(self, precision: int) -> "BigInterval":
        return BigInterval(self.lo, self.hi, precision)

    # --- operators ----------------------------------------------------------

    def __add__(self, other):
        return add(self, _coerce(other, self.precision))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _coerce(other, self.precision))

    def __rsub__(self, other):
        return sub(_coerce(other, self.precision), self)

    def __mul__(self, other):
        return mul(self, _coerce(other, self.precision))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _coerce(other, self.precision))

    def __rtruediv__(self, other):
        return div(_coerce(other, self.precision), self)

    def __neg__(self):
        return BigInterval(-self.hi, -self.lo, self.precision)

    def __repr__(self) -> str:
        return f"BigInterval[{self.lo}, {self.hi}]@{self.precision}"


IntervalLike = Union[BigInterval, int, Fraction]


# --- constructors -------------------------------------------------------------

def from_integer(n: IntLike, precision: int) -> BigInterval:
    """Tightest interval of ``precision`` bits containing the integer ``n``."""
    if precision < 2:
        raise ValueError("precision must be at least 2 bits")
    n = gmpy2.mpz(n)
    lo = _down(precision, mpfr, n)
    hi = _up(precision, mpfr, n)
    # conversion must never lose containment, whatever the binding does
    while lo > n:
        lo = _down(precision, gmpy2.next_below, lo)
    while hi < n:
        hi = _up(precision, gmpy2.next_above, hi)
    return BigInterval(lo, hi, precision)


def from_fraction(q: Union[Fraction, int], precision: int) -> BigInterval:
    """Enclosure of an exact rational."""
    q = Fraction(q)
    if q.denominator == 1:
        return from_integer(q.numerator, precision)
    num = from_integer(q.numerator, precision)
    den = from_integer(q.denominator, precision)
    return div(num, den)


def point(value: "mpfr", precision: int) -> BigInterval:
    """Degenerate interval at an already-representable mpfr value."""
    return BigInterval(value, value, precision)


def ln2(precision: int) -> BigInterval:
    return BigInterval(
        _down(precision, gmpy2.const_log2),
        _up(precision, gmpy2.const_log2),
        precision,
    )


def _coerce(value: IntervalLike, precision: int) -> BigInterval:
    if isinstance(value, BigInterval):
        return value
    if isinstance(value, Fraction):
        return from_fraction(value, precision)
    if isinstance(value, (int, type(gmpy2.mpz(0)))):
        return from_integer(value, precision)
    raise TypeError(f"cannot lift {type(value).__name__} to BigInterval")


def _precision(a: BigInterval, b: BigInterval) -> int:
    return max(a.precision, b.precision)


# --- arithmetic ---------------------------------------------------------------

def add(a: BigInterval, b: BigInterval) -> BigInterval:
    p = _precision(a, b)
    return BigInterval(
        _down(p, lambda: a.lo + b.lo),
        _up(p, lambda: a.hi + b.hi),
        p,
    )


def sub(a: BigInterval, b: BigInterval) -> BigInterval:
    p = _precision(a, b)
    return BigInterval(
        _down(p, lambda: a.lo - b.hi),
        _up(p, lambda: a.hi - b.lo),
        p,
    )


def _clean(values, fallback):
    kept = [v for v in values if not gmpy2.is_nan(v)]
    return kept if kept else [fallback]


def mul(a: BigInterval, b: BigInterval) -> BigInterval:
    p = _precision(a, b)
    pairs = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)]
    lows = _clean([_down(p, lambda x, y: x * y, x, y) for x, y in pairs], gmpy2.inf(-1))
    highs = _clean([_up(p, lambda x, y: x * y, x, y) for x, y in pairs], gmpy2.inf(1))
    return BigInterval(min(lows), max(highs), p)


def div(a: BigInterval, b: BigInterval) -> BigInterval:
    if b.lo <= 0 <= b.hi:
        raise DivisionByIntervalContainingZero(f"divisor {b!r} contains zero")
    p = _precision(a, b)
    pairs = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)]
    lows = _clean([_down(p, lambda x, y: x / y, x, y) for x, y in pairs], gmpy2.inf(-1))
    highs = _clean([_up(p, lambda x, y: x / y, x, y) for x, y in pairs], gmpy2.inf(1))
    return BigInterval(min(lows), max(highs), p)


_ARITH = {"add": add, "sub": sub, "mul": mul, "div": div}


def arith(op: str, a: BigInterval, b: BigInterval) -> BigInterval:
    """Dispatch one of ``add``, ``sub``, ``mul``, ``div``."""
    try:
        return _ARITH[op](a, b)
    except KeyError:
        raise ValueError(f"unknown arithmetic operation '{op}'") from None


# --- elementary functions -------------------------------------------------------

def _monotone(a: BigInterval, fn: Callable) -> BigInterval:
    return BigInterval(_down(a.precision, fn, a.lo), _up(a.precision, fn, a.hi), a.precision)


def exp(a: BigInterval) -> BigInterval:
    return _monotone(a, gmpy2.exp)


def exp2(a: BigInterval) -> BigInterval:
    return _monotone(a, gmpy2.exp2)


def ln(a: BigInterval) -> BigInterval:
    if a.lo <= 0:
        raise DomainError(f"logarithm of non-positive interval {a!r}")
    return _monotone(a, gmpy2.log)


def log2(a: BigInterval) -> BigInterval:
    if a.lo <= 0:
        raise DomainError(f"logarithm of non-positive interval {a!r}")
    return _monotone(a, gmpy2.log2)


def sqrt(a: BigInterval) -> BigInterval:
    if a.lo < 0:
        raise DomainError(f"square root of negative interval {a!r}")
    return _monotone(a, gmpy2.sqrt)


_ELEMENTARY = {"exp": exp, "ln": ln, "exp2": exp2, "log2": log2}


def elementary(op: str, a: BigInterval) -> BigInterval:
    """Dispatch one of ``exp``, ``ln``, ``exp2``, ``log2``."""
    try:
        return _ELEMENTARY[op](a)
    except KeyError:
        raise ValueError(f"unknown elementary function '{op}'") from None


def pow_int(a: BigInterval, e: int) -> BigInterval:
    """a**e for an exact integer exponent."""
    e = int(e)
    if e < 0:
        return div(from_integer(1, a.precision), pow_int(a, -e))
    if e == 0:
        return from_integer(1, a.precision)
    p = a.precision
    lo_down = _down(p, lambda x: x ** e, a.lo)
    lo_up = _up(p, lambda x: x ** e, a.lo)
    hi_down = _down(p, lambda x: x ** e, a.hi)
    hi_up = _up(p, lambda x: x ** e, a.hi)
    if a.lo >= 0:
        return BigInterval(lo_down, hi_up, p)
    if a.hi <= 0:
        if e % 2 == 0:
            return BigInterval(hi_down, lo_up, p)
        return BigInterval(lo_down, hi_up, p)
    if e % 2 == 0:
        return BigInterval(mpfr(0), max(lo_up, hi_up), p)
    return BigInterval(lo_down, hi_up, p)


def nth_root(a: BigInterval, k: int) -> BigInterval:
    """Principal k-th root of a non-negative interval."""
    if a.lo < 0:
        raise DomainError(f"root of negative interval {a!r}")
    k = int(k)
    if k <= 0:
        raise DomainError("root index must be positive")
    if k == 1:
        return a
    if k < 2 ** 63:
        return _monotone(a, lambda x: gmpy2.root(x, k))
    return pow_real(a, from_fraction(Fraction(1, k), a.precision))


def pow_real(a: BigInterval, r: BigInterval) -> BigInterval:
    """a**r computed as exp(r * ln a); requires a.lo > 0."""
    if a.lo <= 0:
        raise DomainError(f"real power of non-positive base {a!r}")
    if a.is_point() and a.lo == 1:
        return from_integer(1, _precision(a, r))
    exponent = r.integer_value()
    if exponent is not None:
        return pow_int(a.with_precision(_precision(a, r)), exponent)
    return exp(mul(r, ln(a)))


# --- comparison -----------------------------------------------------------------

def compare(a: IntervalLike, b: IntervalLike) -> CertifiedOrder:
    """Certified order between two enclosures."""
    if not isinstance(a, BigInterval):
        a = _coerce(a, b.precision if isinstance(b, BigInterval) else 64)
    if not isinstance(b, BigInterval):
        b = _coerce(b, a.precision)
    if a.hi < b.lo:
        return CertifiedOrder.LESS
    if a.lo > b.hi:
        return CertifiedOrder.GREATER
    if a.is_point() and b.is_point() and a.lo == b.lo:
        return CertifiedOrder.EQUAL
    return CertifiedOrder.INDETERMINATE


def certainly_le(a: BigInterval, b: BigInterval) -> bool:
    return a.hi <= b.lo


# --- exact conversions ----------------------------------------------------------

def to_fraction(x: "mpfr") -> Fraction:
    num, den = x.as_integer_ratio()
    return Fraction(int(num), int(den))


def floor_mpfr(x: "mpfr") -> int:
    num, den = x.as_integer_ratio()
    return int(num) // int(den)


def ceil_mpfr(x: "mpfr") -> int:
    num, den = x.as_integer_ratio()
    return -((-int(num)) // int(den))


def bit_size(x: "mpfr") -> int:
    """Binary exponent of |x| (0 for zero), cheap even for huge values."""
    if x == 0 or not gmpy2.is_finite(x):
        return 0 if x == 0 else _EMAX
    return int(gmpy2.get_exp(x))


def decimal_digits_for(precision: int) -> int:
    """Decimal places carrying at least ``precision`` bits."""
    return int(math.ceil(precision * math.log10(2))) + 5


def to_decimal_bounds(a: BigInterval, places: int) -> Tuple[str, str]:
    """Outward-rounded fixed-point decimal strings for the endpoints."""
    scale = 10 ** places
    lo = to_fraction(a.lo) * scale
    hi = to_fraction(a.hi) * scale
    lo_int = lo.numerator // lo.denominator
    hi_int = -((-hi.numerator) // hi.denominator)
    return _fixed(lo_int, places), _fixed(hi_int, places)


def _fixed(value: int, places: int) -> str:
    sign = "-" if value < 0 else ""
    digits = str(abs(value)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}" if places else f"{sign}{digits}"


def from_decimal_bounds(lo: str, hi: str, precision: int) -> BigInterval:
    """Inverse of ``to_decimal_bounds``, again rounded outward."""
    lo_q, hi_q = Fraction(lo), Fraction(hi)
    return BigInterval(
        from_fraction(lo_q, precision).lo,
        from_fraction(hi_q, precision).hi,
        precision,
    )


def hull(a: BigInterval, b: BigInterval) -> BigInterval:
    return BigInterval(min(a.lo, b.lo), max(a.hi, b.hi), _precision(a, b))
