"""
Construction state and result types.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from construction.digits import DigitExtraction
from families.family import FamilyDescriptor
from interval import BigInterval
from sequences.primality import PrimalityCertainty


@dataclass(frozen=True)
class SeedPolicy:
    """SmallestAdmissible when ``index`` is None, otherwise ExplicitIndex(index)."""

    index: Optional[int] = None

    @classmethod
    def smallest_admissible(cls) -> "SeedPolicy":
        return cls()

    @classmethod
    def explicit(cls, index: int) -> "SeedPolicy":
        if index < 0:
            raise ValueError("seed index must be >= 0")
        return cls(index=index)

    def __str__(self) -> str:
        return "SmallestAdmissible" if self.index is None else f"ExplicitIndex({self.index})"


@dataclass(frozen=True)
class ConstructionState:
    """
    One term of the chain and the enclosures it determines.

    X encloses f_n^{-1}(v_n) and Y encloses f_n^{-1}(v_n + 1).
    """

    n: int
    k_n: Optional[int]
    v_n: int
    X: BigInterval
    Y: BigInterval
    precision: int
    certainty: Optional[PrimalityCertainty] = None


@dataclass(frozen=True)
class ChainTerm:
    n: int
    k_n: Optional[int]
    v_n: int
    certainty: Optional[PrimalityCertainty]

    @classmethod
    def from_state(cls, state: ConstructionState) -> "ChainTerm":
        return cls(state.n, state.k_n, state.v_n, state.certainty)


@dataclass
class ConstructionResult:
    """Everything a verifier needs: the chain, the bracket and its provenance."""

    family: FamilyDescriptor
    source_spec: str
    chain: List[ChainTerm]
    bracket_lo: str
    bracket_hi: str
    precision: int
    digits: DigitExtraction
    midpoint: str
    assumptions: List[str] = field(default_factory=list)
    diagnostics: List[Dict[str, Any]] = field(default_factory=list)
    source_sha256: Optional[str] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def terms(self) -> List[int]:
        return [term.v_n for term in self.chain]
