"""
Primality testing with an explicit certainty level.

Below 2^64 the Miller-Rabin test with the first twelve prime bases is a
proof. Above it we run Baillie-PSW plus extra random strong-probable-prime
rounds and say so in the returned certainty.
"""
from enum import Enum
from typing import Optional, Tuple

import gmpy2
import numpy as np

from config.settings import settings


class PrimalityCertainty(str, Enum):
    """How an answer about primality was established."""

    SIEVE_PROVEN = "SieveProven"
    DETERMINISTIC_MR = "DeterministicMR"
    PROBABILISTIC_BPSW = "ProbabilisticBPSW"

    @property
    def rank(self) -> int:
        return _RANK[self]


_RANK = {
    PrimalityCertainty.SIEVE_PROVEN: 3,
    PrimalityCertainty.DETERMINISTIC_MR: 2,
    PrimalityCertainty.PROBABILISTIC_BPSW: 1,
}

# Deterministic for every n < 3.3e24, in particular every n < 2^64.
DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
DETERMINISTIC_LIMIT = 1 << 64


def is_prime(n: int, mr_rounds: Optional[int] = None) -> Tuple[bool, PrimalityCertainty]:
    """
    Decide whether ``n`` is prime.

    Args:
        n: Non-negative integer of any size
        mr_rounds: Extra random Miller-Rabin rounds above 2^64
                   (defaults to settings.MR_ROUNDS)

    Returns:
        Tuple of (is_prime, certainty)
    """
    n = int(n)
    if n < 0:
        raise ValueError("primality is only defined here for n >= 0")
    if n < 2:
        return False, PrimalityCertainty.SIEVE_PROVEN
    for p in DETERMINISTIC_BASES:
        if n == p:
            return True, PrimalityCertainty.SIEVE_PROVEN
        if n % p == 0:
            return False, PrimalityCertainty.SIEVE_PROVEN

    if n < DETERMINISTIC_LIMIT:
        for base in DETERMINISTIC_BASES:
            if not gmpy2.is_strong_prp(n, base):
                return False, PrimalityCertainty.DETERMINISTIC_MR
        return True, PrimalityCertainty.DETERMINISTIC_MR

    certainty = PrimalityCertainty.PROBABILISTIC_BPSW
    if not gmpy2.is_strong_bpsw_prp(n):
        return False, certainty

    rounds = settings.MR_ROUNDS if mr_rounds is None else mr_rounds
    # seeded by n so that repeated runs give identical answers
    rng = np.random.default_rng(n % (1 << 63))
    upper = min(n - 2, (1 << 63) - 1)
    for _ in range(rounds):
        base = int(rng.integers(2, upper))
        if gmpy2.gcd(n, base) != 1:
            return False, certainty
        if not gmpy2.is_strong_prp(n, base):
            return False, certainty
    return True, certainty
