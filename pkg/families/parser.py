"""
Family mini-language: ``name[:key=value,...]``.

    mills[:n0=1]
    wright[:n0=0]
    farhi-power:xi=2,k=2[,a=...][,n0=1]
    farhi-factorial:k=1.5,eps=0.5[,c=...][,n0=...]
    geometric:A=5[,n0=1]
    lambda-power:lambda=1[,M=...][,n0=1]

Defaults that need computation (a, c, n0 of the factorial family, M) are
resolved here, so ``family.spec()`` always reproduces the same family.
"""
import logging
from fractions import Fraction
from typing import Dict, Optional

from config.settings import settings
from families.admissibility import admissible_a, factorial_n0
from families.family import (
    FamilyDescriptor,
    FarhiFactorial,
    FarhiPower,
    GeometricA,
    LambdaPower,
    Mills,
    Wright,
)
from families.gap_function import _parse_pairs
from sequences.gaps import fit_gap_constant
from sequences.sources import FileSequenceSource, SequenceSource
from utils.errors import FamilySpecError

logger = logging.getLogger(__name__)

_KEYS = {
    "mills": ({"n0"}, set()),
    "wright": ({"n0"}, set()),
    "farhi-power": ({"xi", "k", "a", "n0"}, {"xi", "k"}),
    "farhi-factorial": ({"k", "eps", "c", "n0"}, {"k", "eps"}),
    "geometric": ({"A", "n0"}, {"A"}),
    "lambda-power": ({"lambda", "M", "n0"}, {"lambda"}),
}


def _integer(params: Dict[str, Fraction], key: str, name: str) -> Optional[int]:
    if key not in params:
        return None
    value = params[key]
    if value.denominator != 1:
        raise FamilySpecError(f"{name}: {key} must be an integer, got {value}")
    return value.numerator


def parse_family(text: str, source: Optional[SequenceSource] = None,
                 fit_limit: Optional[int] = None) -> FamilyDescriptor:
    """
    Parse a family spec, resolving every default.

    Args:
        text: Mini-language string
        source: Sequence the family will run over (lambda-power's default M)
        fit_limit: Prime range for the factorial family's fitted c

    Raises:
        FamilySpecError: Unknown family, unknown key, missing or invalid value
    """
    name, _, rest = text.strip().partition(":")
    name = name.strip().lower()
    if name not in _KEYS:
        raise FamilySpecError(f"unknown family '{name}' (expected one of {', '.join(_KEYS)})")
    allowed, required = _KEYS[name]
    params = _parse_pairs(rest, allowed, context=name)
    missing = required - params.keys()
    if missing:
        raise FamilySpecError(f"{name}: missing {', '.join(sorted(missing))}")
    n0 = _integer(params, "n0", name)

    try:
        if name == "mills":
            return Mills(n0=1 if n0 is None else n0)
        if name == "wright":
            return Wright(n0=0 if n0 is None else n0)
        if name == "farhi-power":
            return _farhi_power(params, n0)
        if name == "farhi-factorial":
            return _farhi_factorial(params, n0, fit_limit)
        if name == "geometric":
            return GeometricA(params["A"], n0=1 if n0 is None else n0)
        return _lambda_power(params, n0, source)
    except ValueError as e:
        if isinstance(e, FamilySpecError):
            raise
        raise FamilySpecError(f"{name}: {e}") from e


def _farhi_power(params: Dict[str, Fraction], n0: Optional[int]) -> FarhiPower:
    xi, k = params["xi"], params["k"]
    if xi <= 1 or k <= 1:
        raise FamilySpecError("farhi-power needs xi > 1 and k > 1")
    minimal = admissible_a(xi, k)
    a = params.get("a", minimal)
    if a < minimal:
        raise FamilySpecError(f"farhi-power: a may only be raised above {minimal}")
    return FarhiPower(xi, k, a, n0=1 if n0 is None else n0)


def _farhi_factorial(params: Dict[str, Fraction], n0: Optional[int],
                     fit_limit: Optional[int]) -> FarhiFactorial:
    k, eps = params["k"], params["eps"]
    if k <= 1 or eps <= 0:
        raise FamilySpecError("farhi-factorial needs k > 1 and eps > 0")
    c = params.get("c")
    if c is None:
        fitted = fit_gap_constant(fit_limit or settings.GAP_FIT_LIMIT, k)
        # shortest repr round-trips to the same float
        c = Fraction(repr(fitted))
    if n0 is None:
        n0 = factorial_n0(k, eps, c)
    return FarhiFactorial(k, eps, c, n0=n0)


def _lambda_power(params: Dict[str, Fraction], n0: Optional[int],
                  source: Optional[SequenceSource]) -> LambdaPower:
    M = _integer(params, "M", "lambda-power")
    if M is None:
        if not isinstance(source, FileSequenceSource):
            raise FamilySpecError("lambda-power over an unbounded-gap source needs M=")
        M = source.max_gap()
        logger.info(f"lambda-power: M = {M} from the source's largest gap")
    return LambdaPower(params["lambda"], M, n0=1 if n0 is None else n0)
