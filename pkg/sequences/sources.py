"""
Integer sequence sources: the primes, or a strictly increasing file.

Both sources keep a cursor so that consecutive ``next_term_geq`` calls
return strictly increasing indices, as the greedy selection requires.
"""
import bisect
import hashlib
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, NamedTuple, Optional, Union

import numpy as np

from config.settings import settings
from interval import BigInterval, ceil_mpfr
from sequences.primality import PrimalityCertainty
from sequences.sieve import SegmentedSieve
from utils.errors import (
    IndeterminateBound,
    NotFound,
    SequenceExhausted,
    SequenceFileError,
)

logger = logging.getLogger(__name__)

Bound = Union[int, BigInterval]


class SourceTerm(NamedTuple):
    """A located term: its value, 0-based index (None if unknown) and certainty."""

    value: int
    index: Optional[int]
    certainty: Optional[PrimalityCertainty]


class SequenceSource(ABC):
    """Provider of a strictly increasing integer sequence."""

    kind: str = ""

    def __init__(self):
        self._cursor: Optional[int] = None

    # --- subclass interface -------------------------------------------------

    @abstractmethod
    def _first_geq(self, start: int) -> SourceTerm:
        """Smallest term >= start."""

    @abstractmethod
    def term_at(self, index: int) -> SourceTerm:
        """Term with the given 0-based index."""

    @abstractmethod
    def certify(self, value: int) -> Optional[SourceTerm]:
        """Re-establish membership of ``value``; None if it is not a term."""

    @abstractmethod
    def terms_upto(self, limit: int) -> List[int]:
        """All terms <= limit in increasing order."""

    @abstractmethod
    def describe(self) -> str:
        """Source spec string as accepted by ``build_source``."""

    def content_hash(self) -> Optional[str]:
        return None

    # --- cursor -------------------------------------------------------------

    @property
    def cursor(self) -> Optional[int]:
        return self._cursor

    def reset(self) -> None:
        self._cursor = None

    def advance_to(self, value: int) -> None:
        self._cursor = int(value)

    def contains(self, value: int) -> bool:
        return self.certify(value) is not None

    def next_term_geq(self, bound: Bound, advance: bool = True) -> SourceTerm:
        """
        Smallest term u with u >= bound, certified, past the cursor.

        Args:
            bound: Exact integer or an enclosure of a real lower bound
            advance: Move the cursor to the returned term

        Raises:
            IndeterminateBound: The term lies inside the bound's enclosure
            SequenceExhausted: A finite source has no such term
        """
        if isinstance(bound, BigInterval):
            start = ceil_mpfr(bound.lo)
        else:
            start = int(bound)
        if self._cursor is not None:
            start = max(start, self._cursor + 1)

        term = self._first_geq(start)
        if isinstance(bound, BigInterval) and term.value < bound.hi:
            raise IndeterminateBound(
                f"term {term.value} lies inside the bound enclosure", term.value
            )
        if advance:
            self._cursor = term.value
        return term


class PrimeSource(SequenceSource):
    """The primes, located with a segmented sieve and primality tests."""

    kind = "primes"

    def __init__(self, sieve: Optional[SegmentedSieve] = None,
                 index_limit: Optional[int] = None):
        super().__init__()
        self.sieve = sieve or SegmentedSieve()
        self.index_limit = index_limit or settings.PRIME_INDEX_LIMIT
        self._table: Optional[np.ndarray] = None

    def _index_of(self, value: int) -> Optional[int]:
        if value > self.index_limit:
            return None
        return self.sieve.count_primes_upto(value) - 1

    def _first_geq(self, start: int) -> SourceTerm:
        value, certainty = self.sieve.next_prime_geq(start)
        return SourceTerm(value, self._index_of(value), certainty)

    def term_at(self, index: int) -> SourceTerm:
        if self._table is None:
            self._table = self.sieve.primes_upto(self.index_limit)
        if index < 0 or index >= len(self._table):
            raise NotFound(f"prime index {index} is beyond the indexed range")
        value = int(self._table[index])
        return SourceTerm(value, index, PrimalityCertainty.SIEVE_PROVEN)

    def certify(self, value: int) -> Optional[SourceTerm]:
        value = int(value)
        prime, certainty = self.sieve.certify(value)
        if not prime:
            return None
        return SourceTerm(value, self._index_of(value), certainty)

    def terms_upto(self, limit: int) -> List[int]:
        return self.sieve.primes_upto(limit).tolist()

    def describe(self) -> str:
        return "primes"


class FileSequenceSource(SequenceSource):
    """A finite, strictly increasing sequence loaded from a text file."""

    kind = "file"

    def __init__(self, terms: List[int], path: Optional[Path] = None,
                 digest: Optional[str] = None):
        super().__init__()
        self.terms = list(terms)
        self.path = path
        self._digest = digest

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FileSequenceSource":
        """
        Parse a sequence file: one base-10 integer per line, ``#`` comments.

        Raises:
            SequenceFileError: Non-integer token or a non-increasing value
        """
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise SequenceFileError(f"cannot read {path}: {e}") from e
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise SequenceFileError(f"{path} is not UTF-8: {e}") from e

        terms: List[int] = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            token = line.split("#", 1)[0].strip()
            if not token:
                continue
            try:
                value = int(token, 10)
            except ValueError:
                raise SequenceFileError(f"not a base-10 integer: {token!r}", line_no) from None
            if terms and value <= terms[-1]:
                raise SequenceFileError(
                    f"{value} does not exceed previous term {terms[-1]}", line_no
                )
            terms.append(value)

        logger.info(f"Loaded {len(terms)} terms from {path}")
        return cls(terms, path=path, digest=hashlib.sha256(raw).hexdigest())

    def _first_geq(self, start: int) -> SourceTerm:
        index = bisect.bisect_left(self.terms, start)
        if index >= len(self.terms):
            raise SequenceExhausted(f"no term >= {start} in {self.describe()}")
        return SourceTerm(self.terms[index], index, None)

    def term_at(self, index: int) -> SourceTerm:
        if index < 0 or index >= len(self.terms):
            raise SequenceExhausted(f"{self.describe()} has no term with index {index}")
        return SourceTerm(self.terms[index], index, None)

    def certify(self, value: int) -> Optional[SourceTerm]:
        value = int(value)
        index = bisect.bisect_left(self.terms, value)
        if index < len(self.terms) and self.terms[index] == value:
            return SourceTerm(value, index, None)
        return None

    def terms_upto(self, limit: int) -> List[int]:
        return self.terms[: bisect.bisect_right(self.terms, limit)]

    def max_gap(self) -> int:
        """Largest difference between consecutive terms (0 for < 2 terms)."""
        if len(self.terms) < 2:
            return 0
        return max(b - a for a, b in zip(self.terms, self.terms[1:]))

    def describe(self) -> str:
        return f"file:{self.path}" if self.path is not None else "file:<memory>"

    def content_hash(self) -> Optional[str]:
        return self._digest


def build_source(spec: str, mr_rounds: Optional[int] = None) -> SequenceSource:
    """
    Build a source from ``primes`` or ``file:PATH``.

    Raises:
        SequenceFileError: Unknown spec or unreadable file
    """
    spec = spec.strip()
    if spec == "primes":
        return PrimeSource(SegmentedSieve(mr_rounds=mr_rounds))
    if spec.startswith("file:"):
        return FileSequenceSource.load(spec[len("file:"):])
    raise SequenceFileError(f"unknown source '{spec}' (expected 'primes' or 'file:PATH')")
