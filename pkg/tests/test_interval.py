"""
Tests for the BigInterval kernel.
"""
from fractions import Fraction

import gmpy2
import pytest

from interval import (
    BigInterval,
    CertifiedOrder,
    arith,
    compare,
    decimal_digits_for,
    elementary,
    from_decimal_bounds,
    from_fraction,
    from_integer,
    pow_real,
    to_decimal_bounds,
    to_fraction,
)
from utils.errors import DivisionByIntervalContainingZero, DomainError


def ulp(x, precision):
    with gmpy2.context(precision=precision):
        return gmpy2.next_above(x) - x


class TestFromInteger:
    def test_small_integer_is_exact(self):
        a = from_integer(7, 64)
        assert a.lo == a.hi == 7

    def test_large_integer_is_enclosed(self):
        n = 2 ** 100 + 1
        a = from_integer(n, 64)
        assert a.width() > 0
        assert a.contains(n)

    def test_zero_at_minimum_precision(self):
        a = from_integer(0, 2)
        assert a.lo == a.hi == 0

    def test_precision_below_two_rejected(self):
        with pytest.raises(ValueError):
            from_integer(1, 1)


class TestArith:
    def test_add_points(self):
        result = arith("add", from_integer(1, 53), from_integer(2, 53))
        assert result.lo == result.hi == 3

    def test_mul_sign_case(self):
        a = BigInterval(gmpy2.mpfr(-1), gmpy2.mpfr(2), 53)
        result = arith("mul", a, from_integer(3, 53))
        assert result.lo == -3
        assert result.hi == 6

    def test_third_is_tight(self):
        third = arith("div", from_integer(1, 53), from_integer(3, 53))
        assert third.contains(Fraction(1, 3))
        assert third.width() <= 2 * ulp(third.lo, 53)

    def test_division_by_zero_interval(self):
        around_zero = BigInterval(gmpy2.mpfr(-1), gmpy2.mpfr(1), 53)
        with pytest.raises(DivisionByIntervalContainingZero):
            arith("div", from_integer(1, 53), around_zero)

    def test_unknown_operation(self):
        with pytest.raises(ValueError):
            arith("pow", from_integer(1, 53), from_integer(1, 53))


class TestElementary:
    def test_exp2_of_one(self):
        result = elementary("exp2", from_integer(1, 64))
        assert result.contains(2)
        assert result.width() <= 2 * ulp(gmpy2.mpfr(2, 64), 64)

    def test_ln_of_one(self):
        assert elementary("ln", from_integer(1, 64)).contains(0)

    def test_exp2_of_decimal(self):
        x = from_fraction(Fraction("1.92878"), 128)
        result = elementary("exp2", x)
        with gmpy2.context(precision=256):
            reference = gmpy2.exp2(gmpy2.mpfr("1.92878"))
        assert result.lo <= reference <= result.hi
        assert 3.807 < float(result.lo) < 3.808

    def test_log_of_non_positive(self):
        with pytest.raises(DomainError):
            elementary("ln", from_integer(0, 64))


class TestPowReal:
    def test_integer_exponent(self):
        result = pow_real(from_integer(2, 64), from_integer(3, 64))
        assert result.contains(8)
        assert result.width() <= 4 * ulp(gmpy2.mpfr(8, 64), 64)

    def test_cube_root_of_two(self):
        result = pow_real(from_integer(2, 128), from_fraction(Fraction(1, 3), 128))
        # integer cube root of 2 * 10^60 gives 1.2599... to 20 places
        root, _ = gmpy2.iroot(gmpy2.mpz(2) * 10 ** 60, 3)
        assert to_fraction(result.lo) <= Fraction(int(root) + 1, 10 ** 20)
        assert to_fraction(result.hi) >= Fraction(int(root), 10 ** 20)
        assert str(int(root)).startswith("12599210498")

    def test_base_one(self):
        r = from_fraction(Fraction(7, 3), 64)
        assert pow_real(from_integer(1, 64), r).contains(1)


class TestCompare:
    def test_less(self):
        a = BigInterval(gmpy2.mpfr(1), gmpy2.mpfr(2), 53)
        b = BigInterval(gmpy2.mpfr(3), gmpy2.mpfr(4), 53)
        assert compare(a, b) == CertifiedOrder.LESS
        assert compare(b, a) == CertifiedOrder.GREATER

    def test_overlap_is_indeterminate(self):
        a = BigInterval(gmpy2.mpfr(1), gmpy2.mpfr(3), 53)
        b = BigInterval(gmpy2.mpfr(2), gmpy2.mpfr(4), 53)
        assert compare(a, b) == CertifiedOrder.INDETERMINATE

    def test_equal_points(self):
        assert compare(from_integer(5, 53), from_integer(5, 53)) == CertifiedOrder.EQUAL

    def test_equal_only_for_points(self):
        a = BigInterval(gmpy2.mpfr(5), gmpy2.mpfr(6), 53)
        assert compare(a, a) == CertifiedOrder.INDETERMINATE


class TestDecimalBounds:
    def test_round_trip_is_outward(self):
        third = from_fraction(Fraction(1, 3), 128)
        places = decimal_digits_for(128)
        lo, hi = to_decimal_bounds(third, places)
        back = from_decimal_bounds(lo, hi, 128)
        assert back.contains(third)
        assert lo.startswith("0.3333")
        assert len(lo.split(".")[1]) == places

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            BigInterval(gmpy2.mpfr(2), gmpy2.mpfr(1), 53)
