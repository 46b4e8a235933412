"""
Odd-only segmented sieve of Eratosthenes.

Segments are aligned blocks of ``segment_odds`` consecutive odd numbers. A
segment whose end is at most ``base_limit**2`` is sieved completely and its
survivors are primes outright; higher segments are only pre-sieved and every
survivor still has to pass ``is_prime``.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config.settings import settings
from sequences.primality import PrimalityCertainty, is_prime
from sequences.segment_cache import SegmentCache
from utils.errors import DomainError

logger = logging.getLogger(__name__)


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p: limit + 1: p] = False
    return np.flatnonzero(flags).astype(np.int64)


@dataclass(frozen=True)
class Segment:
    """Sieve flags for the odd numbers base, base + 2, ..."""

    number: int
    base: int
    mask: np.ndarray
    complete: bool

    def value(self, offset: int) -> int:
        return self.base + 2 * offset


class SegmentedSieve:
    """
    Locate primes near arbitrarily large bounds.

    Args:
        segment_odds: Odd numbers per segment
        base_limit: Largest sieving prime
        cache_segments: Segments kept in the LRU cache
        mr_rounds: Extra Miller-Rabin rounds for survivors above 2^64
    """

    def __init__(
        self,
        segment_odds: Optional[int] = None,
        base_limit: Optional[int] = None,
        cache_segments: Optional[int] = None,
        mr_rounds: Optional[int] = None,
    ):
        self.segment_odds = segment_odds or settings.SIEVE_SEGMENT_ODDS
        self.span = 2 * self.segment_odds
        self.base_limit = base_limit or settings.SIEVE_BASE_LIMIT
        self.mr_rounds = settings.MR_ROUNDS if mr_rounds is None else mr_rounds
        self.cache = SegmentCache(cache_segments or settings.SIEVE_CACHE_SEGMENTS)
        # odd sieving primes only
        self._base_primes = simple_sieve(self.base_limit)[1:].tolist()

    @property
    def complete_limit(self) -> int:
        """Everything up to here lies in completely sieved segments."""
        return self.base_limit * self.base_limit

    def segment_number(self, value: int) -> int:
        return max(0, (int(value) - 1) // self.span)

    def segment(self, number: int) -> Segment:
        cached = self.cache.get(number)
        if cached is not None:
            return cached
        segment = self._sieve_segment(number)
        self.cache.put(number, segment)
        return segment

    def _sieve_segment(self, number: int) -> Segment:
        base = 1 + number * self.span
        end = base + 2 * (self.segment_odds - 1)
        root = math.isqrt(end)
        mask = np.ones(self.segment_odds, dtype=bool)
        if number == 0:
            mask[0] = False  # 1 is not prime

        for p in self._base_primes:
            if p > root:
                break
            start = max(p * p, -(-base // p) * p)
            if start % 2 == 0:
                start += p
            if start > end:
                continue
            mask[(start - base) // 2:: p] = False

        complete = root <= self.base_limit
        logger.debug(f"Sieved segment at a {base.bit_length()}-bit base (complete={complete})")
        return Segment(number=number, base=base, mask=mask, complete=complete)

    def next_prime_geq(self, bound: int) -> Tuple[int, PrimalityCertainty]:
        """Smallest prime >= bound with the certainty that established it."""
        bound = int(bound)
        if bound <= 2:
            return 2, PrimalityCertainty.SIEVE_PROVEN

        number = self.segment_number(bound)
        while True:
            segment = self.segment(number)
            first = max(0, (bound - segment.base + 1) // 2)
            for offset in (np.flatnonzero(segment.mask[first:]) + first).tolist():
                candidate = segment.value(offset)
                if segment.complete:
                    return candidate, PrimalityCertainty.SIEVE_PROVEN
                prime, certainty = is_prime(candidate, self.mr_rounds)
                if prime:
                    return candidate, certainty
            number += 1

    def certify(self, value: int) -> Tuple[bool, PrimalityCertainty]:
        """Primality of ``value``, decided the same way ``next_prime_geq`` would."""
        value = int(value)
        if value < 3 or value % 2 == 0:
            return is_prime(value, self.mr_rounds)
        segment = self.segment(self.segment_number(value))
        offset = (value - segment.base) // 2
        if not segment.mask[offset]:
            return False, PrimalityCertainty.SIEVE_PROVEN
        if segment.complete:
            return True, PrimalityCertainty.SIEVE_PROVEN
        return is_prime(value, self.mr_rounds)

    def _check_range(self, limit: int) -> None:
        if limit > self.complete_limit:
            raise DomainError(
                f"limit {limit} exceeds the completely sieved range {self.complete_limit}"
            )

    def primes_upto(self, limit: int) -> np.ndarray:
        """All primes <= limit as an int64 array."""
        limit = int(limit)
        self._check_range(limit)
        if limit < 2:
            return np.array([], dtype=np.int64)
        chunks = [np.array([2], dtype=np.int64)]
        for number in range(self.segment_number(limit) + 1):
            segment = self.segment(number)
            values = segment.base + 2 * np.flatnonzero(segment.mask).astype(np.int64)
            chunks.append(values[values <= limit])
        return np.concatenate(chunks)

    def count_primes_upto(self, limit: int) -> int:
        """pi(limit), counted from the cached segments."""
        limit = int(limit)
        self._check_range(limit)
        if limit < 2:
            return 0
        total = 1
        last = self.segment_number(limit)
        for number in range(last):
            total += int(np.count_nonzero(self.segment(number).mask))
        segment = self.segment(last)
        upto = (limit - segment.base) // 2 + 1
        total += int(np.count_nonzero(segment.mask[:upto]))
        return total
