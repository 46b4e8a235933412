"""
Parameter solvers for the power and factorial families.

``admissible_a`` finds the smallest (6 significant digits, rounded up)
domain start a with

    (log x)^(k+1) <= x^(1/2)              for every x > a
    (n+1)^(k+1)  <= a^(n^(xi-1) / 2)      for every n >= 1

and ``factorial_n0`` the smallest n0 >= 2 with

    c ((k+eps)(n+1) log(n+1) + log 2)^k + 1 <= (n+1)^(k+eps)   for n >= n0.

Both locate the answer in floating point and then certify it with
intervals.
"""
import logging
import math
from fractions import Fraction
from typing import Tuple

import numpy as np
from scipy import optimize

from interval import (
    BigInterval,
    CertifiedOrder,
    compare,
    div,
    from_fraction,
    from_integer,
    ln,
    ln2,
    mul,
    pow_real,
    sqrt,
)
from utils.errors import ConvergenceFailure, NotFound

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 6
CERT_PRECISION = 128
SCAN_LIMIT = 10 ** 6
CERTIFIED_TERMS = 1000
MAX_BISECT_ITER = 500


def _round_up_significant(value: float, digits: int = SIGNIFICANT_DIGITS) -> Fraction:
    exponent = math.floor(math.log10(value))
    unit = Fraction(10) ** (exponent - digits + 1)
    q = Fraction(value) / unit
    return -((-q.numerator) // q.denominator) * unit


def _bisect(fn, lo: float, hi: float) -> float:
    try:
        return optimize.bisect(fn, lo, hi, xtol=1e-12, rtol=1e-14, maxiter=MAX_BISECT_ITER)
    except RuntimeError as e:
        raise ConvergenceFailure(f"bisection did not converge on [{lo}, {hi}]: {e}") from e


def _log_crossing(k1: float) -> float:
    """Largest t with t/2 = k1 log t, i.e. the last x = e^t where (log x)^k1 = x^(1/2)."""
    phi = lambda t: t / 2.0 - k1 * math.log(t)
    lo = 2.0 * k1  # phi is increasing beyond its minimum at t = 2 k1
    if phi(lo) >= 0:
        return lo
    hi = 2.0 * lo
    for _ in range(MAX_BISECT_ITER):
        if phi(hi) > 0:
            break
        hi *= 2.0
    else:
        raise ConvergenceFailure("could not bracket the log crossing")
    return _bisect(phi, lo, hi)


def _gap_exponent_max(xi: float, k1: float) -> Tuple[float, int]:
    """
    max over n >= 1 of 2 k1 log(n+1) / n^(xi-1), and the last n scanned.

    The expression decreases once n / ((n+1) log(n+1)) < xi - 1. Integers are
    scanned up to there (at most SCAN_LIMIT); a longer rise is bounded by the
    real maximum, located by bisection in log-space.
    """
    def psi(n: np.ndarray) -> np.ndarray:
        return 2.0 * k1 * np.log1p(n) / n ** (xi - 1.0)

    n = np.arange(1, SCAN_LIMIT + 1, dtype=np.float64)
    falling = n / ((n + 1.0) * np.log1p(n)) < xi - 1.0
    if falling.any():
        stop = int(np.argmax(falling)) + 1
        return float(psi(n[:stop]).max()), stop

    # d/du of log(psi(e^u)) changes sign where e^u / ((e^u + 1) log(e^u + 1)) = xi - 1
    slope = lambda u: math.exp(u) / ((math.exp(u) + 1.0) * math.log1p(math.exp(u))) - (xi - 1.0)
    u_star = _bisect(slope, math.log(SCAN_LIMIT), 700.0)
    peak = 2.0 * k1 * math.log1p(math.exp(u_star)) / math.exp(u_star * (xi - 1.0))
    return max(float(psi(n).max()), peak), SCAN_LIMIT


def _certify_a(a: Fraction, xi: Fraction, k: Fraction, n_max: int) -> bool:
    p = CERT_PRECISION
    A = from_fraction(a, p)
    k1 = from_fraction(k + 1, p)
    log_a = ln(A)
    # past t = 2(k+1) the log crossing cannot come back
    if log_a.lo < from_fraction(2 * (k + 1), p).hi:
        return False
    if pow_real(log_a, k1).hi > sqrt(A).lo:
        return False
    xi1 = from_fraction(xi - 1, p)
    half_log_a = div(log_a, from_integer(2, p))
    for n in range(1, min(n_max, CERTIFIED_TERMS) + 1):
        lhs = mul(k1, ln(from_integer(n + 1, p)))
        rhs = mul(half_log_a, pow_real(from_integer(n, p), xi1))
        if lhs.hi > rhs.lo:
            return False
    return True


def admissible_a(xi, k) -> Fraction:
    """
    Smallest admissible domain start for the power family, rounded up.

    Args:
        xi: Exponent growth, > 1
        k: Gap exponent, > 1

    Returns:
        a as an exact Fraction with 6 significant digits

    Raises:
        ValueError: xi <= 1 or k <= 1
        ConvergenceFailure: A bisection hit its iteration cap
    """
    xi, k = Fraction(xi), Fraction(k)
    if xi <= 1 or k <= 1:
        raise ValueError("admissible_a needs xi > 1 and k > 1")
    k1 = float(k + 1)

    a5 = math.exp(_log_crossing(k1))
    psi_max, n_max = _gap_exponent_max(float(xi), k1)
    a6 = math.exp(psi_max)
    a = _round_up_significant(max(a5, a6))

    for _ in range(20):
        if _certify_a(a, xi, k, n_max):
            logger.info(f"admissible_a(xi={xi}, k={k}) = {float(a):.6g} (a5={a5:.6g}, a6={a6:.6g})")
            return a
        a = _round_up_significant(float(a) * (1 + 10 ** -SIGNIFICANT_DIGITS) * 1.000001)
    raise ConvergenceFailure(f"could not certify an admissible a for xi={xi}, k={k}")


def _factorial_sides(n: int, k: Fraction, s: Fraction, c: Fraction,
                     precision: int = CERT_PRECISION) -> Tuple[BigInterval, BigInterval]:
    m = from_integer(n + 1, precision)
    inner = mul(mul(from_fraction(s, precision), m), ln(m)) + ln2(precision)
    lhs = mul(from_fraction(c, precision), pow_real(inner, from_fraction(k, precision))) + 1
    rhs = pow_real(m, from_fraction(s, precision))
    return lhs, rhs


def factorial_condition(n: int, k, eps, c, precision: int = CERT_PRECISION) -> CertifiedOrder:
    """Certified order of the two sides (LESS or EQUAL means the condition holds)."""
    k, eps, c = Fraction(k), Fraction(eps), Fraction(c)
    for _ in range(6):
        lhs, rhs = _factorial_sides(n, k, k + eps, c, precision)
        order = compare(lhs, rhs)
        if order != CertifiedOrder.INDETERMINATE:
            return order
        precision *= 2
    return CertifiedOrder.INDETERMINATE


def _holds(order: CertifiedOrder) -> bool:
    return order in (CertifiedOrder.LESS, CertifiedOrder.EQUAL)


def factorial_n0(k, eps, c) -> int:
    """
    Smallest n0 >= 2 such that the factorial family's step condition holds
    for every n >= n0.

    Raises:
        ValueError: k <= 1, eps <= 0 or c <= 0
        NotFound: No n0 <= 10^6 passes the scan
    """
    k, eps, c = Fraction(k), Fraction(eps), Fraction(c)
    if k <= 1 or eps <= 0 or c <= 0:
        raise ValueError("factorial_n0 needs k > 1, eps > 0 and c > 0")
    s = k + eps
    kf, sf, cf = float(k), float(s), float(c)

    n = np.arange(2, SCAN_LIMIT + CERTIFIED_TERMS + 2, dtype=np.float64)
    m = n + 1.0
    log_lhs = np.log(cf * (sf * m * np.log(m) + math.log(2.0)) ** kf + 1.0)
    log_rhs = sf * np.log(m)
    failing = np.flatnonzero(log_lhs > log_rhs)
    n0 = 2 if failing.size == 0 else int(n[failing[-1]]) + 1
    if n0 > SCAN_LIMIT:
        raise NotFound(f"no n0 <= {SCAN_LIMIT} for k={k}, eps={eps}, c={c}")

    # certify the window above n0, moving n0 up past any certified failure
    top = n0 + CERTIFIED_TERMS
    index = top
    while index >= n0:
        if not _holds(factorial_condition(index, k, eps, c)):
            n0 = index + 1
            top = n0 + CERTIFIED_TERMS
            index = top
            if n0 > SCAN_LIMIT:
                raise NotFound(f"no n0 <= {SCAN_LIMIT} for k={k}, eps={eps}, c={c}")
            continue
        index -= 1
    # and step down while the float scan was too pessimistic
    while n0 > 2 and _holds(factorial_condition(n0 - 1, k, eps, c)):
        n0 -= 1

    lhs_top, rhs_top = _factorial_sides(top, k, s, c)
    lhs_next, rhs_next = _factorial_sides(top + 1, k, s, c)
    if compare(div(rhs_next, lhs_next), div(rhs_top, lhs_top)) != CertifiedOrder.GREATER:
        logger.warning(f"factorial_n0: ratio not certified increasing at n={top}")
    logger.info(f"factorial_n0(k={k}, eps={eps}, c={float(c):.6g}) = {n0}")
    return n0
