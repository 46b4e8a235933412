"""
Function families f_n with certified evaluation.

Each family provides f_n, its inverse, the derivative ratio
f'_{n+1}/f'_n, the step map h_n = f_{n+1} o f_n^{-1} and the limits
lambda_n, mu_n of f_n at the ends of its domain ]a, b[. Everything is in
closed form; integer fast paths are taken whenever a value is provably an
integer.
"""
import logging
import math
from abc import ABC, abstractmethod
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

import gmpy2

from config.settings import settings
from families.gap_function import GapFunction
from interval import (
    BigInterval,
    CertifiedOrder,
    compare,
    div,
    exp2,
    from_fraction,
    from_integer,
    ln2,
    log2,
    mul,
    nth_root,
    pow_int,
    pow_real,
    sub,
)
from utils.errors import DomainError, FamilySpecError
from utils.rational import exact_integer_power, exact_power, format_rational

logger = logging.getLogger(__name__)

Operand = Union[int, Fraction, BigInterval]
StepValue = Union[int, BigInterval]


class FamilyKind(str, Enum):
    MILLS = "mills"
    WRIGHT = "wright"
    FARHI_POWER = "farhi-power"
    FARHI_FACTORIAL = "farhi-factorial"
    GEOMETRIC = "geometric"
    LAMBDA_POWER = "lambda-power"


def lift(value: Operand, precision: int) -> BigInterval:
    """Enclose an int, Fraction or interval at ``precision`` bits."""
    if isinstance(value, BigInterval):
        return value
    if isinstance(value, Fraction):
        return from_fraction(value, precision)
    return from_integer(value, precision)


def as_interval(value: StepValue, precision: int) -> BigInterval:
    """Step values are exact ints or enclosures; lift the former."""
    return lift(value, precision)


def _mpq(q: Fraction) -> "gmpy2.mpq":
    return gmpy2.mpq(q.numerator, q.denominator)


class FamilyDescriptor(ABC):
    """
    Base class for the function families.

    Args:
        n0: Construction start index (>= first_index)
        domain_lo: Lower end a of the open domain
        domain_hi: Upper end b, None for +infinity
        gap: Gap function g; defaults to the family's own. Overriding it is
             a programmatic hook for experiments and is not part of spec().
    """

    kind: FamilyKind
    first_index: int = 0
    ratio_depends_on_x: bool = True
    default_terms: int = settings.TERMS_SLOW_GROWTH

    def __init__(self, n0: int, domain_lo: Fraction, domain_hi: Optional[Fraction],
                 gap: Optional[GapFunction] = None,
                 max_exact_bits: Optional[int] = None):
        n0 = int(n0)
        if n0 < self.first_index:
            raise FamilySpecError(
                f"{self.kind.value}: n0 must be >= {self.first_index}, got {n0}"
            )
        self.n0 = n0
        self.domain_lo = Fraction(domain_lo)
        self.domain_hi = None if domain_hi is None else Fraction(domain_hi)
        self.gap = gap or self.default_gap()
        self.max_exact_bits = max_exact_bits or settings.MAX_EXACT_BITS

    # --- family-specific ----------------------------------------------------

    @abstractmethod
    def default_gap(self) -> GapFunction:
        """The g under which the family satisfies the hypotheses."""

    @abstractmethod
    def eval(self, n: int, x: BigInterval) -> BigInterval:
        """Enclosure of f_n over x."""

    @abstractmethod
    def _inverse(self, n: int, y: Operand, precision: int) -> BigInterval:
        """Closed-form f_n^{-1}(y)."""

    @abstractmethod
    def derivative_ratio(self, n: int, x: BigInterval) -> BigInterval:
        """Enclosure of f'_{n+1}(x) / f'_n(x)."""

    @abstractmethod
    def _step(self, n: int, w: int, precision: int) -> StepValue:
        """h_n(w) as an exact int or an enclosure."""

    @abstractmethod
    def lambda_n(self, n: int, precision: int) -> BigInterval:
        """Enclosure of f_n(a)."""

    @abstractmethod
    def parameters(self) -> Dict[str, str]:
        """Canonical parameter strings, in mini-language key order."""

    @abstractmethod
    def assumptions(self) -> List[str]:
        """Unproved premises the construction relies on."""

    def mu_n(self, n: int, precision: int) -> Optional[BigInterval]:
        """Enclosure of f_n(b); None when b = +infinity."""
        return None

    # --- shared operations --------------------------------------------------

    def _check_index(self, n: int) -> None:
        if n < self.first_index:
            raise DomainError(
                f"{self.kind.value} is defined for n >= {self.first_index}, got n={n}"
            )

    def _check_domain(self, x: BigInterval) -> None:
        if x.hi <= _mpq(self.domain_lo):
            raise DomainError(f"{x!r} lies below the domain of {self.kind.value}")
        if self.domain_hi is not None and x.lo >= _mpq(self.domain_hi):
            raise DomainError(f"{x!r} lies above the domain of {self.kind.value}")

    def eval_inverse(self, n: int, y: Operand, precision: Optional[int] = None) -> BigInterval:
        """
        Enclosure of f_n^{-1}(y).

        Only the closed formula's own domain is enforced; use ``in_range``
        for membership in ]lambda_n, mu_n - 1[.
        """
        self._check_index(n)
        if precision is None:
            precision = y.precision if isinstance(y, BigInterval) else settings.PRECISION_START
        return self._inverse(n, y, precision)

    def h_apply(self, n: int, v: int, offset: int, precision: Optional[int] = None) -> StepValue:
        """h_n(v + offset), exact when the family admits an integer closed form."""
        self._check_index(n)
        if offset not in (0, 1):
            raise ValueError("offset must be 0 or 1")
        return self._step(n, int(v) + offset, precision or settings.PRECISION_START)

    def hypothesis_slack(self, n: int, x: BigInterval) -> BigInterval:
        """f'_{n+1}/f'_n(x) - g(f_{n+1}(x)); nonnegative where the hypothesis holds."""
        return sub(self.derivative_ratio(n, x), self.gap.evaluate(self.eval(n + 1, x)))

    def _zero_slack(self, x: BigInterval) -> Optional[BigInterval]:
        """Exact zero slack for families where ratio == g o f_{n+1} identically."""
        if self.gap == self.default_gap():
            return from_integer(0, x.precision)
        return None

    def in_range(self, n: int, v: int, precision: Optional[int] = None) -> Optional[bool]:
        """
        Certified v in ]lambda_n, mu_n - 1[.

        Returns:
            True or False when certified, None when the enclosures overlap
        """
        precision = precision or settings.PRECISION_START
        lower = compare(from_integer(v, precision), self.lambda_n(n, precision))
        if lower in (CertifiedOrder.LESS, CertifiedOrder.EQUAL):
            return False
        mu = self.mu_n(n, precision)
        upper = CertifiedOrder.LESS if mu is None else compare(from_integer(v + 1, precision), mu)
        if upper in (CertifiedOrder.GREATER, CertifiedOrder.EQUAL):
            return False
        if lower == CertifiedOrder.INDETERMINATE or upper == CertifiedOrder.INDETERMINATE:
            return None
        return True

    def sample_window(self) -> Tuple[Fraction, Fraction]:
        """Finite sampling window inside ]a, b[."""
        a = self.domain_lo
        if self.domain_hi is None:
            return (a + Fraction(str(settings.WINDOW_OFFSET)),
                    a + Fraction(str(settings.WINDOW_SPAN)))
        width = self.domain_hi - a
        w = Fraction(str(settings.WINDOW_OFFSET))
        return a + w * width, self.domain_hi - w * width

    def spec(self) -> str:
        params = self.parameters()
        if not params:
            return self.kind.value
        return self.kind.value + ":" + ",".join(f"{k}={v}" for k, v in params.items())

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec()})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, FamilyDescriptor) and self.spec() == other.spec()
                and self.gap == other.gap)

    def __hash__(self) -> int:
        return hash(self.spec())

    def _exact_point(self, x: BigInterval) -> Optional[int]:
        value = x.integer_value()
        return None if value is None else int(value)


class Mills(FamilyDescriptor):
    """f_n(x) = x^(3^n) on ]1, +inf[, g(x) = x^(2/3), h_n(x) = x^3."""

    kind = FamilyKind.MILLS
    first_index = 0
    default_terms = settings.TERMS_DOUBLY_EXPONENTIAL

    def __init__(self, n0: int = 1, **kwargs):
        super().__init__(n0, Fraction(1), None, **kwargs)

    def default_gap(self) -> GapFunction:
        return GapFunction.power_two_thirds()

    def eval(self, n: int, x: BigInterval) -> BigInterval:
        self._check_index(n)
        self._check_domain(x)
        e = 3 ** n
        base = self._exact_point(x)
        if base is not None and base.bit_length() * e <= self.max_exact_bits:
            return from_integer(base ** e, x.precision)
        return pow_int(x, e)

    def _inverse(self, n: int, y: Operand, precision: int) -> BigInterval:
        return nth_root(lift(y, precision), 3 ** n)

    def derivative_ratio(self, n: int, x: BigInterval) -> BigInterval:
        self._check_index(n)
        self._check_domain(x)
        return mul(from_integer(3, x.precision), pow_int(x, 2 * 3 ** n))

    def _step(self, n: int, w: int, precision: int) -> StepValue:
        return w ** 3

    def lambda_n(self, n: int, precision: int) -> BigInterval:
        return from_integer(1, precision)

    def parameters(self) -> Dict[str, str]:
        return {"n0": str(self.n0)}

    def assumptions(self) -> List[str]:
        return ["gap bound g(x) = x^(2/3) is certified at every realized step"]


class Wright(FamilyDescriptor):
    """f_0 = Id on ]0, +inf[, f_{n+1} = 2^(f_n), g(x) = (log 2) x, h_n(x) = 2^x."""

    kind = FamilyKind.WRIGHT
    first_index = 0
    default_terms = 4

    def __init__(self, n0: int = 0, **kwargs):
        super().__init__(n0, Fraction(0), None, **kwargs)

    def default_gap(self) -> GapFunction:
        return GapFunction.linear_log2()

    def sample_window(self) -> Tuple[Fraction, Fraction]:
        # f_4 already overflows every exponent range beyond x = 2
        return Fraction(1, 1000), Fraction(2)

    def _tower(self, n: int, x: BigInterval) -> BigInterval:
        value = self._exact_point(x)
        current = x
        for _ in range(n):
            if value is not None and 0 <= value <= self.max_exact_bits:
                value = 1 << value
                continue
            if value is not None:
                current = from_integer(value, x.precision)
                value = None
            current = exp2(current)
        if value is not None:
            return from_integer(value, x.precision)
        return current

    def eval(self, n: int, x: BigInterval) -> BigInterval:
        self._check_index(n)
        self._check_domain(x)
        return self._tower(n, x)

    def _inverse(self, n: int, y: Operand, precision: int) -> BigInterval:
        value = int(y) if isinstance(y, int) else None
        current = None if value is not None else lift(y, precision)
        for _ in range(n):
            if value is not None:
                if value <= 0:
                    raise DomainError("iterated log2 of a non-positive value")
                if value & (value - 1) == 0:
                    value = value.bit_length() - 1
                    continue
                current = from_integer(value, precision)
                value = None
            current = log2(current)
        if value is not None:
            return from_integer(value, precision)
        return current

    def derivative_ratio(self, n: int, x: BigInterval) -> BigInterval:
        return mul(ln2(x.precision), self.eval(n + 1, x))

    def hypothesis_slack(self, n: int, x: BigInterval) -> BigInterval:
        zero = self._zero_slack(x)
        return zero if zero is not None else super().hypothesis_slack(n, x)

    def _step(self, n: int, w: int, precision: int) -> StepValue:
        if w <= self.max_exact_bits:
            return 1 << w
        return exp2(from_integer(w, precision))

    def lambda_n(self, n: int, precision: int) -> BigInterval:
        return self._tower(n, from_integer(0, precision))

    def parameters(self) -> Dict[str, str]:
        return {"n0": str(self.n0)}

    def assumptions(self) -> List[str]:
        return ["gap bound g(x) = (log 2) x follows from Bertrand's postulate"]


class FarhiPower(FamilyDescriptor):
    """
    f_n(x) = x^(n^xi) on ]a, +inf[ with g(x) = (log x)^(k+1).

    The gap bound holds if prime gaps are O((log p)^k), which is unproved;
    the construction certifies it at every step it takes.
    """

    kind = FamilyKind.FARHI_POWER
    first_index = 1
    default_terms = settings.TERMS_DOUBLY_EXPONENTIAL

    def __init__(self, xi, k, a, n0: int = 1, **kwargs):
        self.xi = Fraction(xi)
        self.k = Fraction(k)
        self.a = Fraction(a)
        if self.xi <= 1 or self.k <= 1:
            raise FamilySpecError("farhi-power needs xi > 1 and k > 1")
        if self.a <= 1:
            raise FamilySpecError("farhi-power needs a > 1")
        super().__init__(n0, self.a, None, **kwargs)

    def default_gap(self) -> GapFunction:
        return GapFunction.log_power(1, self.k + 1, 0)

    def _exponent(self, n: int, precision: int) -> Tuple[Optional[int], BigInterval]:
        """n^xi, exact when xi is an integer."""
        if self.xi.denominator == 1:
            e = n ** self.xi.numerator
            return e, from_integer(e, precision)
        exact = exact_integer_power(n, self.xi, self.max_exact_bits)
        if exact is not None:
            return exact, from_integer(exact, precision)
        return None, pow_real(from_integer(n, precision), from_fraction(self.xi, precision))

    def _power(self, x: BigInterval, n: int) -> BigInterval:
        e, e_interval = self._exponent(n, x.precision)
        if e is None:
            return pow_real(x, e_interval)
        base = self._exact_point(x)
        if base is not None and base.bit_length() * e <= self.max_exact_bits:
            return from_integer(base ** e, x.precision)
        return pow_int(x, e)

    def eval(self, n: int, x: BigInterval) -> BigInterval:
        self._check_index(n)
        self._check_domain(x)
        return self._power(x, n)

    def _inverse(self, n: int, y: Operand, precision: int) -> BigInterval:
        e, e_interval = self._exponent(n, precision)
        y = lift(y, precision)
        if e is not None:
            return nth_root(y, e)
        return pow_real(y, div(from_integer(1, precision), e_interval))

    def derivative_ratio(self, n: int, x: BigInterval) -> BigInterval:
        self._check_index(n)
        self._check_domain(x)
        p = x.precision
        step = Fraction(n + 1, n)
        if self.xi.denominator == 1:
            factor = from_fraction(step ** self.xi.numerator, p)
            diff = (n + 1) ** self.xi.numerator - n ** self.xi.numerator
            return mul(factor, pow_int(x, diff))
        factor = pow_real(from_fraction(step, p), from_fraction(self.xi, p))
        _, e_next = self._exponent(n + 1, p)
        _, e_here = self._exponent(n, p)
        return mul(factor, pow_real(x, sub(e_next, e_here)))

    def _step(self, n: int, w: int, precision: int) -> StepValue:
        if self.xi.denominator == 1:
            ratio = Fraction(n + 1, n) ** self.xi.numerator
            exact = exact_integer_power(w, ratio, self.max_exact_bits)
            if exact is not None:
                return exact
            return pow_real(from_integer(w, precision), from_fraction(ratio, precision))
        ratio = pow_real(from_fraction(Fraction(n + 1, n), precision),
                         from_fraction(self.xi, precision))
        return pow_real(from_integer(w, precision), ratio)

    def lambda_n(self, n: int, precision: int) -> BigInterval:
        return self._power(from_fraction(self.a, precision), n)

    def parameters(self) -> Dict[str, str]:
        return {
            "xi": format_rational(self.xi),
            "k": format_rational(self.k),
            "a": format_rational(self.a),
            "n0": str(self.n0),
        }

    def assumptions(self) -> List[str]:
        k, k1 = format_rational(self.k), format_rational(self.k + 1)
        return [
            f"gap bound g(x) = (log x)^{k1} relies on p_(n+1) - p_n = O((log p_n)^{k}), "
            f"which is unproved; it is certified at every realized step",
            f"a = {format_rational(self.a)} satisfies (log x)^{k1} <= x^(1/2) for x > a "
            f"and (n+1)^{k1} <= a^(n^(xi-1)/2) for n >= 1",
        ]


class FarhiFactorial(FamilyDescriptor):
    """
    f_n(x) = (n!)^(k+eps) x on ]1, 2[ with g(x) = c (log x)^k + 1.

    lambda_n = (n!)^s and mu_n = 2 (n!)^s; the seed exists by Bertrand's
    postulate.
    """

    kind = FamilyKind.FARHI_FACTORIAL
    first_index = 1
    ratio_depends_on_x = False

    def __init__(self, k, eps, c, n0: int, **kwargs):
        self.k = Fraction(k)
        self.eps = Fraction(eps)
        self.c = Fraction(c)
        if self.k <= 1 or self.eps <= 0 or self.c <= 0:
            raise FamilySpecError("farhi-factorial needs k > 1, eps > 0 and c > 0")
        self.s = self.k + self.eps
        super().__init__(n0, Fraction(1), Fraction(2), **kwargs)

    def default_gap(self) -> GapFunction:
        return GapFunction.log_power(self.c, self.k, 1)

    def _scaled_power(self, base: int, precision: int) -> StepValue:
        """base^s, exact when it is an integer."""
        exact = exact_integer_power(base, self.s, self.max_exact_bits)
        if exact is not None:
            return exact
        return pow_real(from_integer(base, precision), from_fraction(self.s, precision))

    def scale(self, n: int, precision: int) -> BigInterval:
        """(n!)^s."""
        return as_interval(self._scaled_power(math.factorial(n), precision), precision)

    def eval(self, n: int, x: BigInterval) -> BigInterval:
        self._check_index(n)
        self._check_domain(x)
        return mul(self.scale(n, x.precision), x)

    def _inverse(self, n: int, y: Operand, precision: int) -> BigInterval:
        return div(lift(y, precision), self.scale(n, precision))

    def derivative_ratio(self, n: int, x: BigInterval) -> BigInterval:
        self._check_index(n)
        return as_interval(self._scaled_power(n + 1, x.precision), x.precision)

    def _step(self, n: int, w: int, precision: int) -> StepValue:
        factor = self._scaled_power(n + 1, precision)
        if isinstance(factor, int):
            return factor * w
        return mul(factor, from_integer(w, precision))

    def lambda_n(self, n: int, precision: int) -> BigInterval:
        return self.scale(n, precision)

    def mu_n(self, n: int, precision: int) -> Optional[BigInterval]:
        return mul(from_integer(2, precision), self.scale(n, precision))

    def parameters(self) -> Dict[str, str]:
        return {
            "k": format_rational(self.k),
            "eps": format_rational(self.eps),
            "c": format_rational(self.c),
            "n0": str(self.n0),
        }

    def assumptions(self) -> List[str]:
        c, k = format_rational(self.c), format_rational(self.k)
        s = format_rational(self.s)
        return [
            f"c_k = {c} is fitted empirically: p_(n+1) - p_n <= {c} (log p_n)^{k} "
            f"is assumed beyond the fitted range and certified at every realized step",
            f"n0 = {self.n0} is assumed to satisfy c_k(({s})(n+1)log(n+1) + log 2)^{k} + 1 "
            f"<= (n+1)^{s} for all n >= n0",
        ]


class GeometricA(FamilyDescriptor):
    """f_n(x) = A^n x on ]0, +inf[ with g = A, for sources with gaps <= A - 1."""

    kind = FamilyKind.GEOMETRIC
    first_index = 0
    ratio_depends_on_x = False

    def __init__(self, A, n0: int = 1, **kwargs):
        self.A = Fraction(A)
        if self.A <= 1:
            raise FamilySpecError("geometric needs A > 1")
        super().__init__(n0, Fraction(0), None, **kwargs)

    def default_gap(self) -> GapFunction:
        return GapFunction.constant(self.A)

    def eval(self, n: int, x: BigInterval) -> BigInterval:
        self._check_index(n)
        self._check_domain(x)
        return mul(from_fraction(self.A ** n, x.precision), x)

    def _inverse(self, n: int, y: Operand, precision: int) -> BigInterval:
        return div(lift(y, precision), from_fraction(self.A ** n, precision))

    def derivative_ratio(self, n: int, x: BigInterval) -> BigInterval:
        return from_fraction(self.A, x.precision)

    def hypothesis_slack(self, n: int, x: BigInterval) -> BigInterval:
        zero = self._zero_slack(x)
        return zero if zero is not None else super().hypothesis_slack(n, x)

    def _step(self, n: int, w: int, precision: int) -> StepValue:
        value = self.A * w
        if value.denominator == 1:
            return value.numerator
        return from_fraction(value, precision)

    def lambda_n(self, n: int, precision: int) -> BigInterval:
        return from_integer(0, precision)

    def parameters(self) -> Dict[str, str]:
        return {"A": format_rational(self.A), "n0": str(self.n0)}

    def assumptions(self) -> List[str]:
        return [
            f"source gaps satisfy u_(n+1) - u_n <= A - 1 = {format_rational(self.A - 1)} "
            f"eventually; certified at every realized step"
        ]


class LambdaPower(FamilyDescriptor):
    """f_n(x) = lambda x^n on ]max(1, M+1), +inf[ with g = M + 1."""

    kind = FamilyKind.LAMBDA_POWER
    first_index = 1

    def __init__(self, lam, M: int, n0: int = 1, **kwargs):
        self.lam = Fraction(lam)
        self.M = int(M)
        if self.lam <= 0:
            raise FamilySpecError("lambda-power needs lambda > 0")
        if self.M < 0:
            raise FamilySpecError("lambda-power needs M >= 0")
        super().__init__(n0, Fraction(max(1, self.M + 1)), None, **kwargs)

    def default_gap(self) -> GapFunction:
        return GapFunction.constant(self.M + 1)

    def eval(self, n: int, x: BigInterval) -> BigInterval:
        self._check_index(n)
        self._check_domain(x)
        return mul(from_fraction(self.lam, x.precision), pow_int(x, n))

    def _inverse(self, n: int, y: Operand, precision: int) -> BigInterval:
        return nth_root(div(lift(y, precision), from_fraction(self.lam, precision)), n)

    def derivative_ratio(self, n: int, x: BigInterval) -> BigInterval:
        self._check_index(n)
        return mul(from_fraction(Fraction(n + 1, n), x.precision), x)

    def _step(self, n: int, w: int, precision: int) -> StepValue:
        exponent = Fraction(n + 1, n)
        exact = exact_power(Fraction(w) / self.lam, exponent, self.max_exact_bits)
        if exact is not None:
            value = self.lam * exact
            if value.denominator == 1:
                return value.numerator
            return from_fraction(value, precision)
        base = from_fraction(Fraction(w) / self.lam, precision)
        return mul(from_fraction(self.lam, precision),
                   pow_real(base, from_fraction(exponent, precision)))

    def lambda_n(self, n: int, precision: int) -> BigInterval:
        return from_fraction(self.lam * self.domain_lo ** n, precision)

    def parameters(self) -> Dict[str, str]:
        return {"lambda": format_rational(self.lam), "M": str(self.M), "n0": str(self.n0)}

    def assumptions(self) -> List[str]:
        return [f"source gaps are bounded by M = {self.M}; certified at every realized step"]
