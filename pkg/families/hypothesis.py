"""
Certified sampling of a family's hypotheses.

For each n and each quasi-random sample x the checks are:
  slack      g(f_{n+1}(x)) <= f'_{n+1}/f'_n(x)
  increase   f_{n+1}(x) > f_n(x)
  monotone   the derivative ratio is nondecreasing along sorted samples

A passing report means the hypotheses were certified at the sampled
points, not proved.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import gmpy2
import numpy as np
from scipy.stats import qmc

from config.settings import settings
from families.family import FamilyDescriptor
from interval import BigInterval, CertifiedOrder, compare, point
from utils.errors import PrimeConstantError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HypothesisFinding:
    check: str
    n: int
    x: str
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"check": self.check, "n": self.n, "x": self.x, "detail": self.detail}


@dataclass
class HypothesisReport:
    """Outcome of ``check_hypothesis``."""

    family_spec: str
    n_range: Tuple[int, int]
    sample_count: int
    seed: int
    window: Tuple[str, str]
    checks: int = 0
    violations: List[HypothesisFinding] = field(default_factory=list)
    indeterminate: List[HypothesisFinding] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def statement(self) -> str:
        points = self.sample_count * (self.n_range[1] - self.n_range[0] + 1)
        if self.violations:
            return f"{len(self.violations)} certified violations at {points} sample points"
        return f"certified at {points} sample points"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family_spec": self.family_spec,
            "n_range": list(self.n_range),
            "sample_count": self.sample_count,
            "seed": self.seed,
            "window": list(self.window),
            "checks": self.checks,
            "passed": self.passed,
            "statement": self.statement,
            "violations": [f.to_dict() for f in self.violations],
            "indeterminate": [f.to_dict() for f in self.indeterminate],
        }


def sample_points(lo: Fraction, hi: Fraction, count: int, seed: int) -> List["gmpy2.mpfr"]:
    """Sorted scrambled-Halton points strictly inside ]lo, hi[ as exact mpfr values."""
    sampler = qmc.Halton(d=1, scramble=True, seed=seed)
    unit = sampler.random(count)[:, 0]
    lo_f, hi_f = float(lo), float(hi)
    xs = np.sort(lo_f + unit * (hi_f - lo_f))
    # keep strictly inside the window after float rounding
    xs = np.clip(xs, np.nextafter(lo_f, np.inf), np.nextafter(hi_f, -np.inf))
    return [gmpy2.mpfr(float(x), 53) for x in xs]


def _classify(order: CertifiedOrder, holds: Tuple[CertifiedOrder, ...]) -> Optional[bool]:
    if order == CertifiedOrder.INDETERMINATE:
        return None
    return order in holds


def check_hypothesis(family: FamilyDescriptor, n_range: Tuple[int, int],
                     sample_count: Optional[int] = None, seed: Optional[int] = None,
                     window: Optional[Tuple[Fraction, Fraction]] = None,
                     precision: Optional[int] = None) -> HypothesisReport:
    """
    Certify the family's hypotheses at quasi-random sample points.

    Args:
        family: Family to check
        n_range: Inclusive (first, last) indices
        sample_count: Points per index (default settings.HYPOTHESIS_SAMPLES)
        seed: Halton scrambling seed (default settings.HYPOTHESIS_SEED)
        window: Sampling window inside the domain (default family.sample_window())
        precision: Working precision in bits

    Returns:
        HypothesisReport listing certified violations and undecided points
    """
    sample_count = settings.HYPOTHESIS_SAMPLES if sample_count is None else int(sample_count)
    seed = settings.HYPOTHESIS_SEED if seed is None else int(seed)
    precision = precision or settings.PRECISION_START
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    first, last = int(n_range[0]), int(n_range[1])
    if last < first:
        raise ValueError(f"empty n range {first}..{last}")
    first = max(first, family.first_index)
    lo, hi = window or family.sample_window()

    report = HypothesisReport(
        family_spec=family.spec(), n_range=(first, last), sample_count=sample_count,
        seed=seed, window=(str(lo), str(hi)),
    )
    xs = sample_points(lo, hi, sample_count, seed)

    for n in range(first, last + 1):
        ratios: List[Optional[BigInterval]] = []
        for x in xs:
            X = point(x, precision)
            label = str(x)
            try:
                slack = family.hypothesis_slack(n, X)
                here, there = family.eval(n, X), family.eval(n + 1, X)
                ratio = family.derivative_ratio(n, X) if family.ratio_depends_on_x else None
            except (PrimeConstantError, ArithmeticError, ValueError) as e:
                report.indeterminate.append(HypothesisFinding("evaluation", n, label, str(e)))
                ratios.append(None)
                continue

            report.checks += 2
            _record(report, "slack", n, label, _sign(slack))
            _record(report, "increase", n, label,
                    _classify(compare(there, here), (CertifiedOrder.GREATER,)))
            ratios.append(ratio)

        if family.ratio_depends_on_x:
            for i in range(len(xs) - 1):
                left, right = ratios[i], ratios[i + 1]
                if left is None or right is None or xs[i] == xs[i + 1]:
                    continue
                report.checks += 1
                if left.hi <= right.lo:
                    verdict = True
                elif left.lo > right.hi:
                    verdict = False
                else:
                    verdict = None
                _record(report, "monotone", n, f"{xs[i]}..{xs[i + 1]}", verdict)

    if report.indeterminate:
        logger.warning(f"{len(report.indeterminate)} undecided sample points for {family.spec()}")
    logger.info(f"Hypothesis check for {family.spec()}: {report.statement}")
    return report


def _sign(slack: BigInterval) -> Optional[bool]:
    """True if certainly >= 0, False if certainly < 0."""
    if slack.lo >= 0:
        return True
    if slack.hi < 0:
        return False
    return None


def _record(report: HypothesisReport, check: str, n: int, label: str,
            verdict: Optional[bool]) -> None:
    if verdict is None:
        report.indeterminate.append(HypothesisFinding(check, n, label))
    elif not verdict:
        report.violations.append(HypothesisFinding(check, n, label))
