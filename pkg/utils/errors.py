"""
Exception hierarchy shared by every package.

Library code raises these; only the CLI turns them into exit codes.
"""
from typing import Dict, List, Optional


class PrimeConstantError(Exception):
    """Base class for all errors raised by this project."""


class DivisionByIntervalContainingZero(PrimeConstantError, ZeroDivisionError):
    """Interval division where the divisor straddles or touches zero."""


class DomainError(PrimeConstantError, ValueError):
    """Argument outside the domain of a function or family."""


class PrecisionExhausted(PrimeConstantError):
    """Working precision reached the configured cap without certifying a result."""

    def __init__(self, message: str, precision: Optional[int] = None):
        super().__init__(message)
        self.precision = precision


class TermTooLarge(PrecisionExhausted):
    """The next chain term would exceed the configured size limit."""


class SequenceExhausted(PrimeConstantError):
    """A finite sequence source has no term satisfying the request."""


class IndeterminateBound(PrimeConstantError):
    """A source term falls inside the bound's enclosure; caller must refine."""

    def __init__(self, message: str, term: Optional[int] = None):
        super().__init__(message)
        self.term = term


class ConvergenceFailure(PrimeConstantError):
    """An iterative solver hit its iteration cap."""


class NotFound(PrimeConstantError):
    """A bounded search finished without a result."""


class SeedNotFound(PrimeConstantError):
    """No source term qualifies as the first chain term."""


class GapViolation(PrimeConstantError):
    """Certified failure of v_{n+1} < h_n(v_n + 1) - 1."""

    def __init__(self, n: int, v_n: int, v_next: int,
                 diagnostics: Optional[List[Dict]] = None):
        super().__init__(
            f"gap hypothesis failed at n={n}: v_n={v_n}, next term {v_next} "
            f"is not below h_n(v_n + 1) - 1"
        )
        self.n = n
        self.v_n = v_n
        self.v_next = v_next
        self.diagnostics = diagnostics or []


class SequenceFileError(PrimeConstantError, ValueError):
    """Malformed sequence file; carries the offending line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class FamilySpecError(PrimeConstantError, ValueError):
    """Unparseable or inconsistent family / gap-function specification."""


class IntegrityError(PrimeConstantError):
    """Result document hash does not match its content."""


class CacheMismatch(PrimeConstantError, ValueError):
    """Resume cache belongs to a different family or source."""


class DocumentError(PrimeConstantError, ValueError):
    """Unreadable or schema-invalid result document or cache file."""


class UsageError(PrimeConstantError, ValueError):
    """Command-line arguments that parse but do not fit together."""
