"""
Append-only JSON Lines cache of construction steps.

Each completed step is appended and fsync'd, so an interrupted run can be
resumed by replaying the file. The file is held under an exclusive lock for
the duration of a compute session.
"""
import fcntl
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, IO, List, Optional, Union

from pydantic import ValidationError

from construction.state import ConstructionState
from storage.documents import CacheEntry
from utils.errors import CacheMismatch, DocumentError

logger = logging.getLogger(__name__)


class StepCache:
    """
    Resume cache bound to one family spec and one source.

    Use as a context manager; entries are read on ``open`` and appended by
    ``append``.
    """

    def __init__(self, path: Union[str, Path], family_spec: str, source: str):
        self.path = Path(path)
        self.family_spec = family_spec
        self.source = source
        self._handle: Optional[IO[str]] = None
        self.entries: List[CacheEntry] = []

    def __enter__(self) -> "StepCache":
        self.open()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def open(self) -> List[CacheEntry]:
        """
        Lock the file and load its entries.

        Raises:
            CacheMismatch: Entries belong to another family or source
            DocumentError: A line is not a valid cache entry
        """
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = open(self.path, "a+", encoding="utf-8")
        try:
            fcntl.flock(self._handle.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except BlockingIOError:
            self._handle.close()
            self._handle = None
            raise DocumentError(f"{self.path} is locked by another compute session") from None
        self._handle.seek(0)
        self.entries = self._parse(self._handle.read())
        logger.info(f"Opened step cache {self.path} with {len(self.entries)} entries")
        return self.entries

    def _parse(self, text: str) -> List[CacheEntry]:
        entries = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                entry = CacheEntry.model_validate_json(line)
            except ValidationError as e:
                raise DocumentError(f"{self.path} line {line_no}: invalid cache entry: {e}") from e
            if entry.family_spec != self.family_spec or entry.source != self.source:
                raise CacheMismatch(
                    f"{self.path} was written for {entry.family_spec} over {entry.source}, "
                    f"not {self.family_spec} over {self.source}"
                )
            entries.append(entry)
        return entries

    def append(self, state: ConstructionState, diagnostics: Dict[str, Any]) -> None:
        """Record a finished step durably."""
        if self._handle is None:
            raise RuntimeError("step cache is not open")
        entry = CacheEntry(
            family_spec=self.family_spec,
            source=self.source,
            n=state.n,
            k_n=None if state.k_n is None else str(state.k_n),
            v_n=str(state.v_n),
            precision=state.precision,
            escalations=int(diagnostics.get("escalations", 0)),
            timestamp=datetime.now(timezone.utc).isoformat(),
        )
        self._handle.seek(0, os.SEEK_END)
        self._handle.write(entry.model_dump_json() + "\n")
        self._handle.flush()
        os.fsync(self._handle.fileno())
        self.entries.append(entry)
        logger.debug(f"Cached step n={state.n}")

    def close(self) -> None:
        if self._handle is not None:
            fcntl.flock(self._handle.fileno(), fcntl.LOCK_UN)
            self._handle.close()
            self._handle = None
