"""
Greedy subsequence selection with nested-interval refinement.

Starting from a seed v_{n0}, each step takes the smallest source term
v_{n+1} >= h_n(v_n) and certifies v_{n+1} < h_n(v_n + 1) - 1. The brackets
[f_n^{-1}(v_n), f_n^{-1}(v_n + 1)] then nest, and every A in their
intersection has floor(f_n(A)) = v_n.

Precision escalation is local to the step that needs it and sticky for
the steps after it.
"""
import logging
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

from config.settings import settings
from construction.digits import extract_digits
from construction.state import (
    ChainTerm,
    ConstructionResult,
    ConstructionState,
    SeedPolicy,
)
from families.family import FamilyDescriptor, StepValue
from interval import (
    BigInterval,
    CertifiedOrder,
    bit_size,
    compare,
    decimal_digits_for,
    floor_mpfr,
    from_decimal_bounds,
    from_integer,
    point,
    to_decimal_bounds,
)
from sequences.sources import SequenceSource, SourceTerm
from utils.errors import (
    CacheMismatch,
    DomainError,
    GapViolation,
    IndeterminateBound,
    NotFound,
    PrecisionExhausted,
    PrimeConstantError,
    SeedNotFound,
    SequenceExhausted,
    TermTooLarge,
)

logger = logging.getLogger(__name__)

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"


def floor_status(family: FamilyDescriptor, n: int, v: int, bracket: BigInterval) -> str:
    """Whether f_n over the bracket certainly lies in [v, v + 1)."""
    try:
        image = family.eval(n, bracket)
    except DomainError:
        return FAIL
    if image.lo >= v and image.hi < v + 1:
        return PASS
    if image.hi < v or image.lo >= v + 1:
        return FAIL
    return INDETERMINATE


class Constructor:
    """
    Builds the chain v_{n0}, v_{n0+1}, ... and a certified bracket for A.

    Args:
        family: Function family
        source: Integer sequence (its cursor is reset by ``init``)
        precision_start: Initial working precision in bits
        precision_max: Escalation cap; PrecisionExhausted beyond it
        floor_margin_bits: The final bracket keeps 2^-bits away from v_N and v_N + 1
        max_term_bits: TermTooLarge when h_n(v_n) exceeds this many bits
    """

    def __init__(
        self,
        family: FamilyDescriptor,
        source: SequenceSource,
        precision_start: Optional[int] = None,
        precision_max: Optional[int] = None,
        floor_margin_bits: Optional[int] = None,
        max_term_bits: Optional[int] = None,
    ):
        self.family = family
        self.source = source
        self.precision_start = precision_start or settings.PRECISION_START
        self.precision_max = precision_max or settings.PRECISION_MAX
        self.floor_margin_bits = floor_margin_bits or settings.FLOOR_MARGIN_BITS
        self.max_term_bits = max_term_bits or settings.MAX_TERM_BITS
        if self.precision_start < 2 or self.precision_start > self.precision_max:
            raise ValueError("need 2 <= precision_start <= precision_max")
        self.diagnostics: List[Dict[str, Any]] = []
        self.warnings: List[str] = []

    # --- helpers ------------------------------------------------------------

    def _escalate(self, precision: int, reason: str) -> int:
        doubled = precision * 2
        if doubled > self.precision_max:
            raise PrecisionExhausted(
                f"{reason}: precision cap of {self.precision_max} bits reached", precision
            )
        logger.info(f"Escalating precision {precision} -> {doubled} bits ({reason})")
        return doubled

    def _enclose(self, n: int, v: int, precision: int) -> Tuple[BigInterval, BigInterval, int, int]:
        """X, Y around f_n^{-1}(v), f_n^{-1}(v + 1), separated."""
        escalations = 0
        while True:
            X = self.family.eval_inverse(n, v, precision)
            Y = self.family.eval_inverse(n, v + 1, precision)
            if X.hi < Y.lo:
                return X, Y, precision, escalations
            precision = self._escalate(precision, f"separating x_{n} from y_{n}")
            escalations += 1

    def _check_size(self, value: StepValue, n: int, precision: int,
                    what: Optional[str] = None) -> None:
        bits = value.bit_length() if isinstance(value, int) else bit_size(value.hi)
        if bits > self.max_term_bits:
            label = what or f"h_{n}(v_{n})"
            raise TermTooLarge(
                f"{label} has about {bits} bits, "
                f"above the {self.max_term_bits}-bit limit",
                precision,
            )

    def _seed_candidate(self, policy: SeedPolicy, n: int, precision: int) -> SourceTerm:
        if policy.index is not None:
            return self.source.term_at(policy.index)
        lam = self.family.lambda_n(n, precision)
        self._check_size(lam, n, precision, what=f"the seed bound lambda_{n}")
        return self.source.next_term_geq(floor_mpfr(lam.lo) + 1, advance=False)

    def _select(self, n: int, v: int, precision: int) -> Tuple[SourceTerm, int, int]:
        """Least source term >= h_n(v), certified below h_n(v + 1) - 1."""
        escalations = 0
        while True:
            low = self.family.h_apply(n, v, 0, precision)
            high = self.family.h_apply(n, v, 1, precision)
            self._check_size(low, n, precision)
            try:
                term = self.source.next_term_geq(low, advance=False)
            except IndeterminateBound:
                precision = self._escalate(precision, f"locating v_{n + 1}")
                escalations += 1
                continue

            if isinstance(high, int):
                order = CertifiedOrder.LESS if term.value + 1 < high else CertifiedOrder.GREATER
            else:
                order = compare(from_integer(term.value + 1, precision), high)
            if order == CertifiedOrder.LESS:
                return term, precision, escalations
            if order == CertifiedOrder.INDETERMINATE:
                precision = self._escalate(precision, f"certifying the gap at n={n}")
                escalations += 1
                continue
            raise GapViolation(
                n, v, term.value,
                diagnostics=self.diagnostics + [
                    {"n": n + 1, "precision": precision, "escalations": escalations}
                ],
            )

    def _in_range(self, n: int, v: int, precision: int) -> bool:
        """in_range with precision escalation; never undecided."""
        while True:
            verdict = self.family.in_range(n, v, precision)
            if verdict is not None:
                return verdict
            precision = self._escalate(precision, f"range membership of v_{n}")

    # --- operations ---------------------------------------------------------

    def init(self, seed_policy: Optional[SeedPolicy] = None) -> ConstructionState:
        """
        Choose v_{n0} in ]lambda_{n0}, mu_{n0} - 1[ and enclose x_{n0}, y_{n0}.

        Raises:
            SeedNotFound: No admissible seed (or the explicit one is not admissible)
            PrecisionExhausted: Range membership stayed undecided
            TermTooLarge: The seed bound exceeds the term size limit
        """
        policy = seed_policy or SeedPolicy()
        n = self.family.n0
        precision = self.precision_start
        escalations = 0
        self.source.reset()

        while True:
            try:
                term = self._seed_candidate(policy, n, precision)
            except (SequenceExhausted, NotFound) as e:
                raise SeedNotFound(f"no seed for {self.family.spec()} ({policy}): {e}") from e
            self._check_size(term.value, n, precision, what=f"seed v_{n}")
            verdict = self.family.in_range(n, term.value, precision)
            if verdict is None:
                precision = self._escalate(precision, "seed range membership")
                escalations += 1
                continue
            if not verdict:
                raise SeedNotFound(
                    f"term {term.value} is not in ]lambda_{n}, mu_{n} - 1[ for {self.family.spec()}"
                )
            break

        self.source.advance_to(term.value)
        X, Y, precision, extra = self._enclose(n, term.value, precision)
        self.diagnostics.append({"n": n, "precision": precision, "escalations": escalations + extra})
        logger.info(f"Seed v_{n} = {term.value} ({policy})")
        return ConstructionState(n, term.index, term.value, X, Y, precision, term.certainty)

    def step(self, state: ConstructionState) -> ConstructionState:
        """
        Select v_{n+1} and refine the enclosures.

        Raises:
            GapViolation: v_{n+1} < h_n(v_n + 1) - 1 is certainly false
            TermTooLarge: h_n(v_n) exceeds the term size limit
            PrecisionExhausted: A comparison stayed undecided at the cap
            SequenceExhausted: A finite source ran out
        """
        n, v = state.n, state.v_n
        term, precision, escalations = self._select(n, v, state.precision)

        self.source.advance_to(term.value)
        X, Y, precision, extra = self._enclose(n + 1, term.value, precision)
        if compare(X, state.X) == CertifiedOrder.LESS or compare(Y, state.Y) == CertifiedOrder.GREATER:
            raise PrimeConstantError(f"brackets stopped nesting at n={n + 1}")

        self.diagnostics.append(
            {"n": n + 1, "precision": precision, "escalations": escalations + extra}
        )
        logger.info(f"v_{n + 1} = {term.value} at {precision} bits")
        return ConstructionState(n + 1, term.index, term.value, X, Y, precision, term.certainty)

    def replay(self, entries: Iterable[Any]) -> List[ConstructionState]:
        """
        Rebuild states from cached (n, v_n, precision[, escalations]) records,
        re-certifying range membership and the greedy choice of each term.

        Raises:
            CacheMismatch: Records are not a chain of this family over this source
        """
        states: List[ConstructionState] = []
        expected = self.family.n0
        self.source.reset()
        for entry in entries:
            n, v, precision = int(entry.n), int(entry.v_n), int(entry.precision)
            if n != expected:
                raise CacheMismatch(f"cache entry for n={n}, expected n={expected}")
            if states and v <= states[-1].v_n:
                raise CacheMismatch(f"cached term {v} does not increase the chain")
            term = self.source.certify(v)
            if term is None:
                raise CacheMismatch(f"cached term {v} is not a term of {self.source.describe()}")
            if not self._in_range(n, v, precision):
                raise CacheMismatch(f"cached term {v} is not in ]lambda_{n}, mu_{n} - 1[")
            if states:
                previous = states[-1]
                try:
                    greedy, _, _ = self._select(previous.n, previous.v_n, precision)
                except GapViolation as e:
                    raise CacheMismatch(f"cached chain breaks the gap condition at n={n}") from e
                if greedy.value != v:
                    raise CacheMismatch(
                        f"cached term {v} is not the least term >= h_{n - 1}(v_{n - 1}) "
                        f"({greedy.value})"
                    )
            X, Y, precision, _ = self._enclose(n, v, precision)
            states.append(ConstructionState(n, term.index, v, X, Y, precision, term.certainty))
            self.diagnostics.append(
                {"n": n, "precision": precision, "escalations": int(getattr(entry, "escalations", 0))}
            )
            expected += 1
        if states:
            self.source.advance_to(states[-1].v_n)
            logger.info(f"Replayed {len(states)} cached terms up to n={states[-1].n}")
        return states

    def run(
        self,
        term_count: Optional[int] = None,
        digit_goal: Optional[int] = None,
        seed_policy: Optional[SeedPolicy] = None,
        resume: Optional[Iterable[Any]] = None,
        on_step: Optional[Callable[[ConstructionState, Dict[str, Any]], None]] = None,
    ) -> ConstructionResult:
        """
        Seed, step until ``term_count`` terms exist, then refine the bracket.

        Args:
            term_count: Chain length (default: the family's)
            digit_goal: Certified fractional digits wanted
            seed_policy: SmallestAdmissible (default) or ExplicitIndex
            resume: Cached records to replay before stepping
            on_step: Called with each new state and its diagnostics entry
        """
        term_count = self.family.default_terms if term_count is None else int(term_count)
        if term_count < 1:
            raise ValueError("term_count must be >= 1")
        digit_goal = settings.DIGIT_GOAL if digit_goal is None else int(digit_goal)
        self.diagnostics = []
        self.warnings = []

        states = self.replay(resume) if resume else []
        if len(states) > term_count:
            states = states[:term_count]
            self.diagnostics = self.diagnostics[:term_count]
        if not states:
            states.append(self.init(seed_policy))
            if on_step:
                on_step(states[-1], self.diagnostics[-1])
        while len(states) < term_count:
            states.append(self.step(states[-1]))
            if on_step:
                on_step(states[-1], self.diagnostics[-1])
        return self.finalize(states, digit_goal)

    def finalize(self, states: List[ConstructionState], digit_goal: int) -> ConstructionResult:
        """
        Certified bracket strictly inside [x_N, y_N) with every floor checked.

        Escalates precision until ``digit_goal`` fractional digits are
        certified or the digits stop improving.
        """
        last = states[-1]
        theta = Fraction(1, 2 ** self.floor_margin_bits)
        precision = last.precision
        previous: Optional[str] = None

        while True:
            lower = self.family.eval_inverse(last.n, Fraction(last.v_n) + theta, precision)
            upper = self.family.eval_inverse(last.n, Fraction(last.v_n + 1) - theta, precision)
            places = decimal_digits_for(precision)
            lo_text, hi_text = to_decimal_bounds(BigInterval(lower.lo, upper.hi, precision), places)
            bracket = from_decimal_bounds(lo_text, hi_text, precision)
            floors_ok = all(
                floor_status(self.family, s.n, s.v_n, bracket) == PASS for s in states
            )
            digits = extract_digits(lo_text, hi_text)

            if floors_ok and digits.fraction_digits >= digit_goal:
                break
            if floors_ok and previous == digits.digits:
                self._warn(f"digit goal {digit_goal} not reachable with {len(states)} terms; "
                           f"bracket width allows {digits.fraction_digits}")
                break
            previous = digits.digits if floors_ok else None
            try:
                precision = self._escalate(precision, "final bracket refinement")
            except PrecisionExhausted:
                if not floors_ok:
                    raise
                self._warn(f"stopped at the precision cap with {digits.fraction_digits} digits")
                break

        midpoint = to_decimal_bounds(point(bracket.midpoint(), precision + 1), places)[0]
        logger.info(f"Certified digits: {digits.digits or '(integer part undecided)'}")
        return ConstructionResult(
            family=self.family,
            source_spec=self.source.describe(),
            chain=[ChainTerm.from_state(s) for s in states],
            bracket_lo=lo_text,
            bracket_hi=hi_text,
            precision=precision,
            digits=digits,
            midpoint=midpoint,
            assumptions=self.family.assumptions(),
            diagnostics=list(self.diagnostics),
            source_sha256=self.source.content_hash(),
            warnings=list(self.warnings),
        )

    def _warn(self, message: str) -> None:
        logger.warning(message)
        self.warnings.append(message)


def run_construction(family: FamilyDescriptor, source: SequenceSource,
                     term_count: Optional[int] = None,
                     digit_goal: Optional[int] = None, **kwargs) -> ConstructionResult:
    """Convenience wrapper: ``Constructor(family, source, **kwargs).run(...)``."""
    return Constructor(family, source, **kwargs).run(term_count, digit_goal)
