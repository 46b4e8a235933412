"""
Shared fixtures: one prime source per session and sequence files on disk.
"""
from pathlib import Path
from typing import Callable, Iterable

import pytest

from sequences.sieve import SegmentedSieve
from sequences.sources import FileSequenceSource, PrimeSource

MILLS_CHAIN = [2, 11, 1361, 2521008887]
WRIGHT_CHAIN = [2, 5, 37, 137438953481]
MILLS_DIGITS = "1.3063778838630806904686144926"


@pytest.fixture(scope="session")
def sieve() -> SegmentedSieve:
    return SegmentedSieve()


@pytest.fixture
def primes(sieve) -> PrimeSource:
    # fresh cursor per test, shared segment cache
    return PrimeSource(sieve)


@pytest.fixture
def write_sequence(tmp_path) -> Callable[..., Path]:
    """Write integers (one per line) to a file under tmp_path."""

    def _write(values: Iterable[int], name: str = "sequence.txt", header: str = "") -> Path:
        path = tmp_path / name
        body = "\n".join(str(v) for v in values)
        path.write_text((header + "\n" if header else "") + body + "\n", encoding="utf-8")
        return path

    return _write


@pytest.fixture
def non_multiples_of_four(write_sequence) -> FileSequenceSource:
    path = write_sequence((n for n in range(1, 2_000_001) if n % 4), name="not_div4.txt",
                          header="# positive integers that are not multiples of 4")
    return FileSequenceSource.load(path)
