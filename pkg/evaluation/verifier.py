"""
Independent re-verification of a construction result.

Works from the result document alone plus the sequence source: the family is
rebuilt from its spec, the bracket from its decimal endpoints, and every check
is re-evaluated at a higher precision than the construction used.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

from config.settings import settings
from construction.constructor import FAIL, INDETERMINATE, PASS, floor_status
from construction.state import ConstructionResult
from families.family import FamilyDescriptor, as_interval
from families.gap_function import GapFunction
from families.hypothesis import check_hypothesis
from families.parser import parse_family
from interval import CertifiedOrder, compare, from_decimal_bounds, sub
from sequences.primality import PrimalityCertainty
from sequences.sources import SequenceSource, build_source
from storage.documents import ResultDocument, build_document, check_integrity
from utils.errors import IntegrityError, PrimeConstantError

logger = logging.getLogger(__name__)

Result = Union[ConstructionResult, ResultDocument]

# extra doublings tried before a floor or gap check is left undecided
EXTRA_DOUBLINGS = 2


@dataclass(frozen=True)
class CheckEntry:
    n: Optional[int]
    status: str
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "status": self.status, "detail": self.detail}


@dataclass
class CheckReport:
    """Per-term outcome of one verification check."""

    check: str
    entries: List[CheckEntry] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(entry.status == PASS for entry in self.entries)

    def failures(self) -> List[CheckEntry]:
        return [entry for entry in self.entries if entry.status != PASS]

    def add(self, n: Optional[int], status: str, detail: str = "") -> None:
        self.entries.append(CheckEntry(n, status, detail))

    def warn(self, message: str) -> None:
        logger.warning(message)
        self.warnings.append(message)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "passed": self.passed,
            "entries": [entry.to_dict() for entry in self.entries],
            "warnings": list(self.warnings),
            **self.extra,
        }


@dataclass
class VerificationReport:
    """All checks run by ``Verifier.verify_all``."""

    family_spec: str
    checks: List[CheckReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def warnings(self) -> List[str]:
        return [w for check in self.checks for w in check.warnings]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family_spec": self.family_spec,
            "passed": self.passed,
            "warnings": self.warnings,
            "checks": [check.to_dict() for check in self.checks],
        }


def as_document(result: Result) -> ResultDocument:
    if isinstance(result, ResultDocument):
        return result
    return build_document(result, timestamp=False)


class Verifier:
    """
    Re-checks floors, source membership, hypotheses and integrity.

    Args:
        precision_factor: Verification precision = factor x construction precision
        sample_count: Hypothesis samples per index
        seed: Hypothesis sampling seed
        mr_rounds: Random Miller-Rabin rounds for sources built here

    Verification never mutates its inputs.
    """

    def __init__(self, precision_factor: Optional[int] = None,
                 sample_count: Optional[int] = None, seed: Optional[int] = None,
                 mr_rounds: Optional[int] = None):
        self.precision_factor = precision_factor or settings.VERIFY_PRECISION_FACTOR
        if self.precision_factor < 1:
            raise ValueError("precision_factor must be >= 1")
        self.sample_count = sample_count
        self.seed = seed
        self.mr_rounds = mr_rounds

    # --- rebuilding ---------------------------------------------------------

    def _precision(self, document: ResultDocument) -> int:
        return document.bracket.precision_bits * self.precision_factor

    def source_for(self, document: ResultDocument) -> SequenceSource:
        return build_source(document.source, mr_rounds=self.mr_rounds)

    def family_for(self, document: ResultDocument,
                   source: Optional[SequenceSource] = None) -> FamilyDescriptor:
        """
        The document's family, with the gap function it was built under.

        Raises:
            FamilySpecError: The spec or gap function does not parse
        """
        family = parse_family(document.family_spec, source)
        gap = GapFunction.parse(document.gap_function)
        if gap != family.gap:
            family.gap = gap
        return family

    # --- checks -------------------------------------------------------------

    def verify_floors(self, result: Result,
                      family: Optional[FamilyDescriptor] = None) -> CheckReport:
        """floor(f_n(A)) == v_n for every chain term, over the whole bracket."""
        document = as_document(result)
        report = CheckReport("floors")
        family = family or self.family_for(document)
        precision = self._precision(document)
        try:
            from_decimal_bounds(document.bracket.lo, document.bracket.hi, precision)
        except (ValueError, ArithmeticError, ZeroDivisionError) as e:
            report.add(None, FAIL, f"unusable bracket: {e}")
            return report
        report.extra["precision_bits"] = precision

        for entry in document.chain:
            status, detail = self._floor(family, entry.n, int(entry.v_n), document, precision)
            report.add(entry.n, status, detail)

        logger.info(f"Floor check: {len(report.failures())} of {len(report.entries)} terms failed")
        return report

    @staticmethod
    def _floor(family: FamilyDescriptor, n: int, v: int, document: ResultDocument,
               precision: int) -> Tuple[str, str]:
        for _ in range(EXTRA_DOUBLINGS + 1):
            bracket = from_decimal_bounds(document.bracket.lo, document.bracket.hi, precision)
            try:
                status = floor_status(family, n, v, bracket)
            except PrimeConstantError as e:
                return FAIL, str(e)
            if status == PASS:
                return PASS, ""
            if status == FAIL:
                return FAIL, f"floor(f_{n}(A)) is not {v}"
            precision *= 2
        return INDETERMINATE, f"f_{n} over the bracket straddles {v} or {v + 1}"

    def verify_membership(self, result: Result,
                          source: Optional[SequenceSource] = None) -> CheckReport:
        """Every v_n is a source term, indices agree and the chain strictly increases."""
        document = as_document(result)
        report = CheckReport("membership")
        source = source or self.source_for(document)

        if source.describe() != document.source:
            report.warn(f"verifying against {source.describe()}, result names {document.source}")
        digest = source.content_hash()
        if document.source_sha256 and digest and digest != document.source_sha256:
            report.warn("source file content differs from the one used for construction")

        previous: Optional[Tuple[int, int]] = None
        probable: List[str] = []
        for entry in document.chain:
            v = int(entry.v_n)
            problems = []
            if previous is not None:
                if entry.n != previous[0] + 1:
                    problems.append(f"index {entry.n} does not follow {previous[0]}")
                if v <= previous[1]:
                    problems.append(f"{v} does not exceed the previous term {previous[1]}")
            previous = (entry.n, v)

            term = source.certify(v)
            if term is None:
                problems.append(f"{v} is not a term of {source.describe()}")
            else:
                if entry.k_n is not None and term.index is not None and int(entry.k_n) != term.index:
                    problems.append(f"k_{entry.n} is {term.index}, result says {entry.k_n}")
                self._compare_certainty(report, entry.n, entry.certainty, term.certainty)
                if term.certainty == PrimalityCertainty.PROBABILISTIC_BPSW:
                    probable.append(f"n={entry.n}: {v}")

            report.add(entry.n, FAIL if problems else PASS, "; ".join(problems))

        if probable:
            report.warn(f"membership rests on probable-prime tests for {', '.join(probable)}")

        logger.info(f"Membership check: {len(report.failures())} of {len(report.entries)} terms failed")
        return report

    @staticmethod
    def _compare_certainty(report: CheckReport, n: int, claimed: Optional[str],
                           found: Optional[PrimalityCertainty]) -> None:
        if claimed is None or found is None:
            return
        try:
            stated = PrimalityCertainty(claimed)
        except ValueError:
            report.warn(f"n={n}: unknown certainty '{claimed}'")
            return
        if found.rank < stated.rank:
            report.warn(f"n={n}: certainty downgraded from {stated.value} to {found.value}")

    def verify_hypotheses(self, result: Result,
                          family: Optional[FamilyDescriptor] = None) -> CheckReport:
        """
        Sampled hypothesis check over the indices used, plus
        g(h_n(v_n)) <= h_n(v_n + 1) - h_n(v_n) at every realized step.
        """
        document = as_document(result)
        report = CheckReport("hypotheses")
        family = family or self.family_for(document)
        precision = self._precision(document)
        first = document.chain[0].n
        last = max(first, document.chain[-1].n - 1)

        sampled = check_hypothesis(family, (first, last), sample_count=self.sample_count,
                                   seed=self.seed, precision=precision)
        report.extra["sampling"] = sampled.to_dict()
        report.extra["assumptions"] = list(document.assumptions)
        for finding in sampled.violations:
            report.add(finding.n, FAIL, f"{finding.check} fails at x={finding.x}")
        if sampled.indeterminate:
            report.warn(f"{len(sampled.indeterminate)} sample points left undecided")

        for entry in document.chain[:-1]:
            status, detail = self._step_gap(family, entry.n, int(entry.v_n), precision)
            report.add(entry.n, status, detail)
        return report

    def _step_gap(self, family: FamilyDescriptor, n: int, v: int,
                  precision: int) -> Tuple[str, str]:
        for _ in range(EXTRA_DOUBLINGS + 1):
            try:
                low = family.h_apply(n, v, 0, precision)
                high = family.h_apply(n, v, 1, precision)
                room = sub(as_interval(high, precision), as_interval(low, precision))
                needed = family.gap.evaluate(as_interval(low, precision))
            except PrimeConstantError as e:
                return INDETERMINATE, str(e)
            order = compare(needed, room)
            if order in (CertifiedOrder.LESS, CertifiedOrder.EQUAL) or needed.hi <= room.lo:
                return PASS, ""
            if order == CertifiedOrder.GREATER:
                return FAIL, f"g(h_{n}({v})) exceeds h_{n}({v} + 1) - h_{n}({v})"
            precision *= 2
        return INDETERMINATE, f"step gap at n={n} undecided"

    def verify_integrity(self, document: ResultDocument) -> CheckReport:
        report = CheckReport("integrity")
        try:
            check_integrity(document)
            report.add(None, PASS)
        except IntegrityError as e:
            report.add(None, FAIL, str(e))
        return report

    def verify_all(self, document: ResultDocument,
                   source: Optional[SequenceSource] = None) -> VerificationReport:
        """
        Integrity, floors, membership and hypotheses.

        A failed integrity check skips the rest: the content cannot be trusted.

        Raises:
            FamilySpecError: The document's family spec does not parse
            SequenceFileError: The document's source cannot be rebuilt
        """
        report = VerificationReport(document.family_spec)
        integrity = self.verify_integrity(document)
        report.checks.append(integrity)
        if not integrity.passed:
            logger.error(f"Integrity check failed for {document.family_spec}")
            return report

        source = source or self.source_for(document)
        family = self.family_for(document, source)
        report.checks.append(self.verify_floors(document, family))
        report.checks.append(self.verify_membership(document, source))
        report.checks.append(self.verify_hypotheses(document, family))
        logger.info(f"Verification of {document.family_spec}: "
                    f"{'passed' if report.passed else 'failed'}")
        return report
