"""
Result documents: pydantic models, canonical JSON and integrity hashing.

All big integers and bracket endpoints are decimal strings. The integrity
field is the SHA-256 of the canonical JSON of everything except
``integrity`` and ``created_at``.
"""
import hashlib
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ValidationError

from construction.state import ConstructionResult
from utils.errors import DocumentError, IntegrityError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
_UNHASHED = {"integrity", "created_at"}


class ChainEntry(BaseModel):
    """One chain term."""
    n: int
    k_n: Optional[str] = None
    v_n: str
    certainty: Optional[str] = None


class BracketModel(BaseModel):
    """Certified bracket for A, endpoints rounded outward."""
    lo: str
    hi: str
    precision_bits: int


class ResultDocument(BaseModel):
    """Serialized ConstructionResult."""
    schema_version: int = SCHEMA_VERSION
    family_spec: str
    parameters: Dict[str, str]
    gap_function: str
    source: str
    source_sha256: Optional[str] = None
    chain: List[ChainEntry]
    bracket: BracketModel
    digits: str
    integer_part_decided: bool = True
    midpoint: str  # display only, not canonical
    assumptions: List[str] = []
    warnings: List[str] = []
    diagnostics: List[Dict[str, int]] = []
    created_at: Optional[str] = None
    integrity: str = ""


class CacheEntry(BaseModel):
    """One line of the resume cache."""
    family_spec: str
    source: str
    n: int
    k_n: Optional[str] = None
    v_n: str
    precision: int
    escalations: int = 0
    timestamp: Optional[str] = None


def canonical_json(data: Dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def compute_integrity(document: ResultDocument) -> str:
    payload = document.model_dump(exclude=_UNHASHED)
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def build_document(result: ConstructionResult, timestamp: bool = True) -> ResultDocument:
    """Serialize a construction result and seal it with its integrity hash."""
    document = ResultDocument(
        family_spec=result.family.spec(),
        parameters=result.family.parameters(),
        gap_function=result.family.gap.spec(),
        source=result.source_spec,
        source_sha256=result.source_sha256,
        chain=[
            ChainEntry(
                n=term.n,
                k_n=None if term.k_n is None else str(term.k_n),
                v_n=str(term.v_n),
                certainty=None if term.certainty is None else term.certainty.value,
            )
            for term in result.chain
        ],
        bracket=BracketModel(lo=result.bracket_lo, hi=result.bracket_hi,
                             precision_bits=result.precision),
        digits=result.digits.digits,
        integer_part_decided=result.digits.integer_decided,
        midpoint=result.midpoint,
        assumptions=list(result.assumptions),
        warnings=list(result.warnings),
        diagnostics=[dict(d) for d in result.diagnostics],
        created_at=datetime.now(timezone.utc).isoformat() if timestamp else None,
    )
    document.integrity = compute_integrity(document)
    return document


def dump_document(document: ResultDocument) -> str:
    """Canonical JSON text (including the hash and timestamp) plus newline."""
    return canonical_json(document.model_dump()) + "\n"


def save_document(document: ResultDocument, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_document(document), encoding="utf-8")
    logger.info(f"Wrote result document to {path}")


def parse_document(text: str) -> ResultDocument:
    """
    Validate a document's JSON text.

    Raises:
        DocumentError: Not JSON or not a result document
    """
    try:
        return ResultDocument.model_validate_json(text)
    except ValidationError as e:
        raise DocumentError(f"malformed result document: {e}") from e


def load_document(path: Union[str, Path]) -> ResultDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise DocumentError(f"cannot read {path}: {e}") from e
    return parse_document(text)


def check_integrity(document: ResultDocument) -> None:
    """
    Raises:
        IntegrityError: The stored hash does not match the content
    """
    expected = compute_integrity(document)
    if document.integrity != expected:
        raise IntegrityError(
            f"integrity mismatch: stored {document.integrity or '(none)'}, computed {expected}"
        )
