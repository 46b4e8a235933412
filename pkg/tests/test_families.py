"""
Tests for gap functions, the six families, admissibility solvers,
hypothesis sampling and the family mini-language.
"""
import math
from fractions import Fraction

import pytest

from families.admissibility import admissible_a, factorial_condition, factorial_n0
from families.family import (
    FarhiFactorial,
    FarhiPower,
    GeometricA,
    LambdaPower,
    Mills,
    Wright,
)
from families.gap_function import GapFunction, GapKind
from families.hypothesis import check_hypothesis, sample_points
from families.parser import parse_family
from interval import CertifiedOrder, from_integer, to_fraction
from sequences.sources import FileSequenceSource
from utils.errors import DomainError, FamilySpecError


@pytest.fixture(scope="module")
def power_a():
    return admissible_a(2, 2)


def factorial_oracle(k: float, eps: float, c: float, upto: int = 100_000) -> int:
    """Smallest n0 >= 2 after the last float failure of the step condition."""
    s = k + eps
    last_failure = 1
    for n in range(2, upto):
        m = n + 1
        if c * (s * m * math.log(m) + math.log(2)) ** k + 1 > m ** s:
            last_failure = n
    return last_failure + 1


class TestGapFunction:
    def test_parse_round_trip(self):
        for text in ("pow:2/3", "linear-log2", "const:5", "logpow:c=2,k=1.5,offset=1"):
            assert GapFunction.parse(text).spec() == text

    def test_linear_is_power_one(self):
        g = GapFunction.parse("linear")
        assert g.kind == GapKind.POWER
        assert g.exponent == 1

    def test_unknown(self):
        with pytest.raises(FamilySpecError):
            GapFunction.parse("cubic")

    def test_constant_is_exact(self):
        g = GapFunction.constant(5)
        value = g.evaluate(from_integer(123, 64))
        assert value.lo == value.hi == 5

    def test_nondecreasing(self):
        g = GapFunction.log_power(2, Fraction(3, 2), 1)
        values = [g.evaluate(from_integer(x, 64)) for x in (2, 10, 100, 10 ** 6)]
        for left, right in zip(values, values[1:]):
            assert left.hi <= right.hi


class TestEval:
    def test_mills_exact(self):
        y = Mills().eval(1, from_integer(2, 64))
        assert y.lo == y.hi == 8

    def test_farhi_power_exact(self):
        family = FarhiPower(2, 2, Fraction(3, 2))
        y = family.eval(3, from_integer(2, 64))
        assert y.lo == y.hi == 512

    def test_wright_tower(self):
        y = Wright().eval(2, from_integer(1, 64))
        assert y.contains(4)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            Mills().eval(1, from_integer(1, 64))

    def test_index_below_first(self):
        with pytest.raises(DomainError):
            FarhiPower(2, 2, 2).eval(0, from_integer(3, 64))


class TestInverse:
    def test_mills_cube_root(self):
        x = Mills().eval_inverse(1, 11, 128)
        assert 2.22398 < float(x.lo) <= float(x.hi) < 2.22399
        assert to_fraction(x.lo) ** 3 <= 11 <= to_fraction(x.hi) ** 3

    def test_factorial_rational(self):
        family = FarhiFactorial(Fraction(3, 2), 1, 2, n0=1)
        x = family.eval_inverse(3, 36, 128)
        # 36 / 6^(5/2) = 1 / sqrt(6)
        assert abs(float(x.lo) - 1 / math.sqrt(6)) < 1e-15
        assert float(x.lo) == pytest.approx(0.40825, abs=1e-5)

    def test_wright_exact_on_powers_of_two(self):
        x = Wright().eval_inverse(2, 16, 64)
        assert x.lo == x.hi == 2


class TestDerivativeRatio:
    def test_factorial_is_constant(self):
        family = FarhiFactorial(Fraction(3, 2), 1, 2, n0=1)
        ratio = family.derivative_ratio(3, from_integer(1, 64))
        assert ratio.lo == ratio.hi == 32

    def test_geometric(self):
        ratio = GeometricA(5).derivative_ratio(7, from_integer(3, 64))
        assert ratio.lo == ratio.hi == 5

    def test_farhi_power(self):
        ratio = FarhiPower(2, 2, Fraction(3, 2)).derivative_ratio(1, from_integer(2, 64))
        assert ratio.contains(32)


class TestStep:
    def test_mills(self):
        assert Mills().h_apply(3, 11, 0) == 1331

    def test_wright(self):
        assert Wright().h_apply(2, 5, 1) == 64

    def test_farhi_power_exact_power(self):
        assert FarhiPower(2, 2, Fraction(3, 2)).h_apply(2, 81, 0) == 19683

    def test_lambda_power(self):
        family = LambdaPower(1, 3)
        assert family.h_apply(1, 4, 0) == 16

    def test_offset_validated(self):
        with pytest.raises(ValueError):
            Mills().h_apply(1, 2, 2)


class TestRange:
    def test_mills(self):
        assert Mills().in_range(1, 2) is True
        assert Mills().in_range(1, 1) is False

    def test_factorial_window(self):
        family = FarhiFactorial(Fraction(3, 2), Fraction(1, 2), 2, n0=3)
        # ]3!^2, 2 * 3!^2 - 1[ = ]36, 71[
        assert family.in_range(3, 37) is True
        assert family.in_range(3, 36) is False
        assert family.in_range(3, 70) is True
        assert family.in_range(3, 71) is False


class TestAdmissibility:
    def test_power_a_magnitude(self, power_a):
        assert power_a > 10
        assert 2.4e7 < power_a < 2.5e7

    def test_power_a_conditions(self, power_a):
        a = float(power_a)
        assert math.log(a) ** 3 <= math.sqrt(a)
        for n in range(1, 51):
            assert (n + 1) ** 3 <= a ** (n / 2)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            admissible_a(1, 2)

    def test_factorial_n0_matches_scan(self):
        n0 = factorial_n0(Fraction(3, 2), Fraction(1, 2), 2)
        assert n0 == factorial_oracle(1.5, 0.5, 2.0)
        assert factorial_condition(n0, Fraction(3, 2), Fraction(1, 2), 2) in (
            CertifiedOrder.LESS, CertifiedOrder.EQUAL)
        assert factorial_condition(n0 - 1, Fraction(3, 2), Fraction(1, 2), 2) == CertifiedOrder.GREATER

    def test_factorial_n0_monotone_in_c(self):
        k, eps = Fraction(3, 2), Fraction(1, 2)
        assert factorial_n0(k, eps, 2) <= factorial_n0(k, eps, 4)


class TestHypothesis:
    def test_sample_points_are_deterministic(self):
        first = sample_points(Fraction(1), Fraction(10), 50, seed=3)
        second = sample_points(Fraction(1), Fraction(10), 50, seed=3)
        assert first == second
        assert all(1 < x < 10 for x in first)
        assert first == sorted(first)

    def test_mills(self):
        report = check_hypothesis(Mills(), (0, 5), sample_count=100, seed=1,
                                  window=(Fraction(1), Fraction(10)))
        assert report.passed
        assert report.statement == "certified at 600 sample points"

    def test_wright_equality_case(self):
        report = check_hypothesis(Wright(), (0, 3), sample_count=32, seed=0)
        assert report.passed
        assert not [f for f in report.indeterminate if f.check == "slack"]

    def test_farhi_power(self, power_a):
        report = check_hypothesis(FarhiPower(2, 2, power_a), (1, 10), sample_count=100, seed=0)
        assert report.passed

    def test_huge_constant_gap_is_violated(self):
        family = Mills(gap=GapFunction.constant(10 ** 9))
        report = check_hypothesis(family, (0, 0), sample_count=16, seed=0)
        assert not report.passed
        assert {f.check for f in report.violations} == {"slack"}


class TestParser:
    def test_defaults_are_resolved(self):
        assert parse_family("mills").spec() == "mills:n0=1"
        assert parse_family("wright").spec() == "wright:n0=0"
        assert parse_family("geometric:A=5").spec() == "geometric:A=5,n0=1"

    def test_spec_round_trip(self):
        family = parse_family("farhi-factorial:k=3/2,eps=1/2,c=2,n0=40")
        assert parse_family(family.spec()) == family

    def test_unknown_family(self):
        with pytest.raises(FamilySpecError):
            parse_family("euler")

    def test_unknown_key(self):
        with pytest.raises(FamilySpecError):
            parse_family("mills:xi=2")

    def test_missing_key(self):
        with pytest.raises(FamilySpecError):
            parse_family("geometric")

    def test_geometric_needs_a_above_one(self):
        with pytest.raises(FamilySpecError):
            parse_family("geometric:A=1")

    def test_lambda_power_needs_bounded_gaps(self, primes):
        with pytest.raises(FamilySpecError):
            parse_family("lambda-power:lambda=1", primes)

    def test_lambda_power_takes_m_from_file(self):
        family = parse_family("lambda-power:lambda=1", FileSequenceSource([1, 2, 5, 6]))
        assert family.M == 3

    def test_farhi_power_a_only_upward(self, power_a):
        with pytest.raises(FamilySpecError):
            parse_family(f"farhi-power:xi=2,k=2,a={power_a - 1}")
