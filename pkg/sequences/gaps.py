"""
Empirical gap analysis: condition u_{n+1} - u_n <= g(u_n) - 1 over a range,
and the fitted constant c in p_{n+1} - p_n <= c (log p_n)^k.

Pairs are consecutive terms that are both <= limit. Large scans are
screened in float64 first; only pairs inside a narrow relative band around
equality are decided with interval arithmetic.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import gmpy2
import numpy as np
import pandas as pd

from config.settings import settings
from families.gap_function import GapFunction
from interval import (
    CertifiedOrder,
    compare,
    div,
    from_fraction,
    from_integer,
    ln,
    pow_real,
)
from sequences.sieve import SegmentedSieve
from sequences.sources import SequenceSource

logger = logging.getLogger(__name__)

SCREEN_TOLERANCE = 1e-9
FIT_SLACK = Fraction(1, 10 ** 6)
_FLOAT_EXACT = 2 ** 53

Pair = Tuple[int, int, int]


@dataclass
class GapReport:
    """Outcome of a gap scan; ``violations`` lists (index, u_n, u_{n+1})."""

    limit: int
    pair_count: int
    max_gap: int
    argmax_prime: Optional[int]
    violations: List[Pair] = field(default_factory=list)
    indeterminate: List[Pair] = field(default_factory=list)
    gap_function: Optional[str] = None
    fitted_constant: Optional[float] = None

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {
            "limit": self.limit,
            "pair_count": self.pair_count,
            "max_gap": self.max_gap,
            "argmax_prime": None if self.argmax_prime is None else str(self.argmax_prime),
            "gap_function": self.gap_function,
            "violations": [[i, str(a), str(b)] for i, a, b in self.violations],
            "indeterminate": [[i, str(a), str(b)] for i, a, b in self.indeterminate],
            "fitted_constant": self.fitted_constant,
        }


def _certify_pair(g: GapFunction, u: int, gap: int, precision: int,
                  attempts: int = 4) -> CertifiedOrder:
    """Order of gap + 1 against g(u), escalating precision a few times."""
    for _ in range(attempts):
        order = compare(from_integer(gap + 1, precision), g.evaluate(from_integer(u, precision)))
        if order != CertifiedOrder.INDETERMINATE:
            return order
        precision *= 2
    return CertifiedOrder.INDETERMINATE


def scan_gaps(source: SequenceSource, limit: int, g: GapFunction,
              precision: Optional[int] = None) -> GapReport:
    """
    Check u_{n+1} - u_n <= g(u_n) - 1 for every pair of terms <= limit.

    Args:
        source: Sequence to scan (its cursor is not touched)
        limit: Inclusive upper bound for both terms of a pair
        g: Gap function
        precision: Starting precision for certified pair checks

    Returns:
        GapReport; pairs that stay undecided are listed as indeterminate
    """
    precision = precision or settings.PRECISION_START
    terms = source.terms_upto(limit)
    report = GapReport(limit=int(limit), pair_count=max(0, len(terms) - 1),
                       max_gap=0, argmax_prime=None, gap_function=g.spec())
    if len(terms) < 2:
        return report

    if terms[-1] < _FLOAT_EXACT:
        values = np.asarray(terms, dtype=np.int64)
        gaps = np.diff(values)
        bound = g.evaluate_array(values[:-1].astype(np.float64))
        margin = bound - 1.0 - gaps
        band = SCREEN_TOLERANCE * np.maximum(1.0, np.abs(bound))
        clear_bad = margin < -band
        unsure = np.abs(margin) <= band
        top = int(np.argmax(gaps))
        report.max_gap = int(gaps[top])
        report.argmax_prime = int(values[top])
        candidates = np.flatnonzero(clear_bad | unsure).tolist()
        decided_bad = set(np.flatnonzero(clear_bad).tolist())
    else:
        gaps = [b - a for a, b in zip(terms, terms[1:])]
        top = max(range(len(gaps)), key=gaps.__getitem__)
        report.max_gap = int(gaps[top])
        report.argmax_prime = int(terms[top])
        candidates = list(range(len(gaps)))
        decided_bad = set()

    for i in candidates:
        u, gap = int(terms[i]), int(gaps[i])
        if i in decided_bad:
            report.violations.append((i, u, int(terms[i + 1])))
            continue
        order = _certify_pair(g, u, gap, precision)
        if order == CertifiedOrder.GREATER:
            report.violations.append((i, u, int(terms[i + 1])))
        elif order == CertifiedOrder.INDETERMINATE:
            report.indeterminate.append((i, u, int(terms[i + 1])))

    logger.info(
        f"Scanned {report.pair_count} pairs up to {limit} against {g.spec()}: "
        f"{len(report.violations)} violations, max gap {report.max_gap}"
    )
    return report


def _ratio_upper(p: int, gap: int, k: Fraction, precision: int) -> "gmpy2.mpfr":
    """Upper bound of gap / (log p)^k."""
    log_p = ln(from_integer(p, precision))
    return div(from_integer(gap, precision), pow_real(log_p, from_fraction(k, precision))).hi


def fit_gap_constant(limit: int, k, sieve: Optional[SegmentedSieve] = None,
                     precision: Optional[int] = None) -> float:
    """
    Smallest c with p_{n+1} - p_n <= c (log p_n)^k for consecutive primes <= limit.

    The maximising pairs are re-evaluated with intervals and the result is
    widened by a relative 1e-6 and rounded up to a float.
    """
    limit = int(limit)
    k = Fraction(k)
    if limit < 3:
        raise ValueError("fit_gap_constant needs limit >= 3")
    if k <= 0:
        raise ValueError("fit_gap_constant needs k > 0")
    precision = precision or settings.PRECISION_START
    sieve = sieve or SegmentedSieve()

    primes = sieve.primes_upto(limit)
    gaps = np.diff(primes)
    ratios = gaps / np.log(primes[:-1].astype(np.float64)) ** float(k)
    best = float(ratios.max())
    candidates = np.flatnonzero(ratios >= best * (1 - 1e-6)).tolist()

    c = max(_ratio_upper(int(primes[i]), int(gaps[i]), k, precision) for i in candidates)
    with gmpy2.context(precision=53, round=gmpy2.RoundUp):
        widened = gmpy2.mpfr(c) * (1 + gmpy2.mpfr(FIT_SLACK.numerator) / FIT_SLACK.denominator)
        fitted = float(widened)
    logger.info(f"Fitted c={fitted:.6g} for k={k} over primes <= {limit}")
    return fitted


def maximal_gap_table(terms: Sequence[int]) -> pd.DataFrame:
    """Record gaps: every pair whose gap exceeds all earlier gaps."""
    rows = []
    record = 0
    for a, b in zip(terms, terms[1:]):
        gap = int(b) - int(a)
        if gap > record:
            record = gap
            rows.append({"gap": gap, "term": int(a), "next": int(b)})
    return pd.DataFrame(rows, columns=["gap", "term", "next"])
