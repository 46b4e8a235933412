"""
Tests for independent re-verification of construction results.
"""
from fractions import Fraction

import pytest

from construction.constructor import PASS, run_construction
from evaluation.verifier import CheckReport, Verifier
from families.family import FarhiFactorial, GeometricA, Mills
from families.parser import parse_family
from sequences.primality import PrimalityCertainty, is_prime
from storage.documents import build_document, compute_integrity


@pytest.fixture
def mills_result(primes):
    return run_construction(Mills(), primes, term_count=4, digit_goal=10)


@pytest.fixture
def mills_document(mills_result):
    return build_document(mills_result)


def resealed(document, **changes):
    """Copy with chain/field changes and a recomputed integrity hash."""
    copy = document.model_copy(deep=True)
    for index, value in changes.pop("chain", {}).items():
        copy.chain[index].v_n = value
    for key, value in changes.items():
        setattr(copy, key, value)
    copy.integrity = compute_integrity(copy)
    return copy


def failed_indices(report, check):
    [found] = [c for c in report.checks if c.check == check]
    return [entry.n for entry in found.failures()]


class TestRoundTrip:
    def test_mills_passes(self, mills_document, primes):
        report = Verifier().verify_all(mills_document, primes)
        assert report.passed
        assert [c.check for c in report.checks] == ["integrity", "floors", "membership", "hypotheses"]

    def test_verifies_the_result_object(self, mills_result, primes):
        verifier = Verifier()
        assert verifier.verify_floors(mills_result).passed
        assert verifier.verify_membership(mills_result, primes).passed

    def test_floors_use_higher_precision(self, mills_document):
        report = Verifier(precision_factor=3).verify_floors(mills_document)
        assert report.extra["precision_bits"] == 3 * mills_document.bracket.precision_bits

    def test_verification_leaves_document_unchanged(self, mills_document, primes):
        before = mills_document.model_dump()
        Verifier().verify_all(mills_document, primes)
        assert mills_document.model_dump() == before

    def test_geometric_over_file_source(self, non_multiples_of_four):
        result = run_construction(GeometricA(5), non_multiples_of_four, term_count=6, digit_goal=3)
        report = Verifier().verify_all(build_document(result), non_multiples_of_four)
        assert report.passed

    def test_farhi_power(self, primes):
        family = parse_family("farhi-power:xi=2,k=2")
        result = run_construction(family, primes, term_count=3, digit_goal=5)
        assert all(is_prime(v)[0] for v in result.terms)
        report = Verifier().verify_all(build_document(result), primes)
        assert report.passed

        # terms above 2^64 are BPSW probable primes and must be flagged
        probable = [term for term in result.chain if term.v_n >= 2 ** 64]
        assert probable
        [warning] = [w for w in report.warnings if "probable-prime" in w]
        for term in probable:
            assert f"n={term.n}: {term.v_n}" in warning

    def test_small_chain_has_no_probable_prime_warning(self, mills_document, primes):
        report = Verifier().verify_all(mills_document, primes)
        assert not any("probable-prime" in w for w in report.warnings)

    def test_factorial_with_explicit_start(self, primes):
        family = FarhiFactorial(Fraction(3, 2), Fraction(1, 2), 2, n0=40)
        result = run_construction(family, primes, term_count=5, digit_goal=10)
        verifier = Verifier()
        assert verifier.verify_floors(result).passed
        assert verifier.verify_membership(result, primes).passed


class TestTampering:
    def test_composite_term(self, mills_document, primes):
        tampered = resealed(mills_document, chain={2: "1362"})
        report = Verifier().verify_all(tampered, primes)
        assert not report.passed
        assert failed_indices(report, "floors") == [3]
        assert failed_indices(report, "membership") == [3]

    def test_repeated_term(self, mills_document, primes):
        tampered = resealed(mills_document, chain={3: "1361"})
        report = Verifier().verify_all(tampered, primes)
        assert failed_indices(report, "membership") == [4]
        [membership] = [c for c in report.checks if c.check == "membership"]
        assert "does not exceed" in membership.failures()[0].detail

    def test_edited_digits_break_integrity(self, mills_document, primes):
        tampered = mills_document.model_copy(deep=True)
        tampered.digits = tampered.digits[:-1] + str((int(tampered.digits[-1]) + 1) % 10)
        report = Verifier().verify_all(tampered, primes)
        assert not report.passed
        assert [c.check for c in report.checks] == ["integrity"]

    def test_weakened_gap_function_breaks_integrity(self, mills_document, primes):
        tampered = mills_document.model_copy(deep=True)
        tampered.gap_function = "const:1000000000"
        assert not Verifier().verify_all(tampered, primes).passed

    def test_resealed_weak_gap_fails_hypotheses(self, mills_document, primes):
        tampered = resealed(mills_document, gap_function="const:1000000000")
        report = Verifier().verify_all(tampered, primes)
        assert failed_indices(report, "hypotheses")
        assert not failed_indices(report, "floors")

    def test_wrong_prime_index(self, mills_document, primes):
        tampered = mills_document.model_copy(deep=True)
        tampered.chain[2].k_n = "300"
        tampered.integrity = compute_integrity(tampered)
        assert failed_indices(Verifier().verify_all(tampered, primes), "membership") == [3]


class TestHypothesisCheck:
    def test_step_gaps_for_mills(self, mills_result):
        report = Verifier(sample_count=16, seed=0).verify_hypotheses(mills_result)
        assert report.passed
        # one step-gap entry per step taken
        assert [e.n for e in report.entries] == [1, 2, 3]
        assert report.extra["sampling"]["statement"].startswith("certified at")

    def test_equality_step_gap_passes(self, non_multiples_of_four):
        result = run_construction(GeometricA(5), non_multiples_of_four, term_count=3, digit_goal=1)
        report = Verifier(sample_count=8).verify_hypotheses(result)
        assert all(entry.status == PASS for entry in report.entries)


def test_certainty_downgrade_is_a_warning():
    report = CheckReport("membership")
    Verifier._compare_certainty(report, 3, PrimalityCertainty.SIEVE_PROVEN.value,
                                PrimalityCertainty.PROBABILISTIC_BPSW)
    assert report.passed
    assert report.warnings == ["n=3: certainty downgraded from SieveProven to ProbabilisticBPSW"]


def test_precision_factor_validated():
    with pytest.raises(ValueError):
        Verifier(precision_factor=0)
