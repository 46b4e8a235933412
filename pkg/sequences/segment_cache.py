"""
In-memory LRU cache for sieve segments.

Construction steps search narrow windows near h_n(v_n); the same segment is
often revisited while precision is escalated, so recently used segments are
kept and the oldest ones evicted.
"""
import logging
import threading
from collections import OrderedDict
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


class SegmentCache:
    """
    Thread-safe LRU cache keyed by segment number.

    This class:
    1. Stores sieved segments for fast re-use
    2. Evicts the least recently used segment when full
    3. Tracks hit/miss statistics
    """

    def __init__(self, max_segments: int = 32):
        self.max_segments = max_segments
        self._segments: "OrderedDict[int, Any]" = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: int) -> Optional[Any]:
        """Return the cached segment or None."""
        with self._lock:
            segment = self._segments.get(key)
            if segment is None:
                self.misses += 1
                return None
            self._segments.move_to_end(key)
            self.hits += 1
            return segment

    def put(self, key: int, segment: Any) -> None:
        """Insert a segment, evicting the oldest entry when full."""
        with self._lock:
            self._segments[key] = segment
            self._segments.move_to_end(key)
            while len(self._segments) > self.max_segments:
                evicted, _ = self._segments.popitem(last=False)
                logger.debug(f"Evicted sieve segment {evicted}")

    def clear(self) -> None:
        with self._lock:
            self._segments.clear()

    def get_hit_rate(self) -> float:
        total = self.hits + self.misses
        if total == 0:
            return 0.0
        return self.hits / total

    def get_stats(self) -> Dict[str, Any]:
        """Get cache performance statistics."""
        with self._lock:
            size = len(self._segments)
        return {
            "segments": size,
            "max_segments": self.max_segments,
            "hits": self.hits,
            "misses": self.misses,
            "hit_rate": self.get_hit_rate(),
        }
