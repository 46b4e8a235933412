"""
Command-line front end.

    python -m cli.main compute --family mills --terms 5 --digits 12
    python -m cli.main verify --input result.json
    python -m cli.main gaps --limit 100 --fit k=1
    python -m cli.main hypothesis --family wright --n-range 0..3

stdout carries only results; logging goes to stderr.
"""
import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import List, Optional, Tuple

from config.settings import settings
from construction.constructor import Constructor
from construction.state import SeedPolicy
from evaluation.verifier import Verifier
from families.gap_function import GapFunction, _parse_pairs
from families.hypothesis import check_hypothesis
from families.parser import parse_family
from sequences.gaps import fit_gap_constant, maximal_gap_table, scan_gaps
from sequences.sources import PrimeSource, build_source
from storage.documents import build_document, dump_document, load_document, save_document
from storage.step_cache import StepCache
from utils.errors import (
    CacheMismatch,
    DocumentError,
    DomainError,
    FamilySpecError,
    GapViolation,
    PrecisionExhausted,
    PrimeConstantError,
    SeedNotFound,
    SequenceExhausted,
    SequenceFileError,
    UsageError,
)
from utils.rational import parse_rational

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_GAP_VIOLATION = 3
EXIT_PRECISION = 4
EXIT_EXHAUSTED = 5
EXIT_VERIFY_FAILED = 6


def exit_code_for(error: Exception) -> int:
    """Map library exceptions to process exit codes."""
    if isinstance(error, GapViolation):
        return EXIT_GAP_VIOLATION
    if isinstance(error, PrecisionExhausted):
        return EXIT_PRECISION
    if isinstance(error, (SequenceExhausted, SeedNotFound)):
        return EXIT_EXHAUSTED
    if isinstance(error, (DocumentError, FamilySpecError, SequenceFileError,
                          CacheMismatch, DomainError, UsageError)):
        return EXIT_USAGE
    return EXIT_ERROR


# --- argument types --------------------------------------------------------------

def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def index_range(text: str) -> Tuple[int, int]:
    """``A..B`` into an inclusive integer range."""
    first, sep, last = text.partition("..")
    try:
        if not sep:
            raise ValueError
        lo, hi = int(first), int(last)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got '{text}'") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range '{text}'")
    return lo, hi


def rational_range(text: str) -> Tuple[Fraction, Fraction]:
    """``LO..HI`` with rational endpoints, LO < HI."""
    first, sep, last = text.partition("..")
    try:
        if not sep:
            raise ValueError
        lo, hi = parse_rational(first), parse_rational(last)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got '{text}'") from None
    if hi <= lo:
        raise argparse.ArgumentTypeError(f"empty window '{text}'")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="primeconst",
        description="Certified constants A with floor(f_n(A)) in a given integer sequence.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="Warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    compute = commands.add_parser("compute", help="Build a chain and certify digits of A")
    compute.add_argument("--family", required=True, help="Family spec, e.g. mills or geometric:A=5")
    compute.add_argument("--terms", type=positive_int, default=None, help="Chain length")
    compute.add_argument("--digits", type=non_negative_int, default=None,
                         help="Certified fractional digits wanted")
    compute.add_argument("--source", default="primes", help="primes or file:PATH")
    compute.add_argument("--precision-start", type=positive_int, default=None)
    compute.add_argument("--precision-max", type=positive_int, default=None)
    compute.add_argument("--mr-rounds", type=non_negative_int, default=None)
    compute.add_argument("--seed-index", type=non_negative_int, default=None,
                         help="Use the K-th source term as the seed")
    compute.add_argument("--resume", default=None, help="JSON Lines step cache")
    compute.add_argument("--out", default=None, help="Write the result document here")
    output = compute.add_mutually_exclusive_group()
    output.add_argument("--json", dest="plain", action="store_false",
                        help="Emit the result document (default)")
    output.add_argument("--plain", dest="plain", action="store_true",
                        help="Emit the certified digits only")
    compute.set_defaults(plain=False)

    verify = commands.add_parser("verify", help="Re-verify a result document")
    verify.add_argument("--input", required=True)
    verify.add_argument("--source", default=None, help="Override the document's source")
    verify.add_argument("--precision-factor", type=positive_int, default=None)
    verify.add_argument("--samples", type=positive_int, default=None)
    verify.add_argument("--rng-seed", type=int, default=None)
    verify.add_argument("--mr-rounds", type=non_negative_int, default=None)

    gaps = commands.add_parser("gaps", help="Gap scan, maximal-gap table and fitted constant")
    gaps.add_argument("--limit", type=int, required=True)
    mode = gaps.add_mutually_exclusive_group()
    mode.add_argument("--g", dest="gap", default=None, help="Gap function, e.g. pow:2/3")
    mode.add_argument("--fit", default=None, help="k=K: fit c in gap <= c (log p)^k")
    gaps.add_argument("--source", default="primes")
    gaps.add_argument("--json", action="store_true")

    hypothesis = commands.add_parser("hypothesis", help="Certify a family's hypotheses at samples")
    hypothesis.add_argument("--family", required=True)
    hypothesis.add_argument("--n-range", type=index_range, required=True)
    hypothesis.add_argument("--samples", type=positive_int, default=None)
    hypothesis.add_argument("--rng-seed", type=int, default=None)
    hypothesis.add_argument("--window", type=rational_range, default=None)
    hypothesis.add_argument("--precision", type=positive_int, default=None)
    hypothesis.add_argument("--source", default="primes")
    return parser


def configure_logging(args: argparse.Namespace) -> None:
    level = settings.LOG_LEVEL.upper()
    if args.verbose:
        level = "DEBUG"
    elif args.quiet:
        level = "WARNING"
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


# --- commands --------------------------------------------------------------------

def cmd_compute(args: argparse.Namespace) -> int:
    source = build_source(args.source, mr_rounds=args.mr_rounds)
    family = parse_family(args.family, source)
    try:
        constructor = Constructor(
            family, source,
            precision_start=args.precision_start,
            precision_max=args.precision_max,
        )
    except ValueError as e:
        raise UsageError(str(e)) from e
    seed_policy = SeedPolicy() if args.seed_index is None else SeedPolicy.explicit(args.seed_index)
    logger.info(f"Computing {family.spec()} over {source.describe()}")

    try:
        if args.resume:
            with StepCache(args.resume, family.spec(), source.describe()) as cache:
                result = constructor.run(args.terms, args.digits, seed_policy,
                                         resume=cache.entries, on_step=cache.append)
        else:
            result = constructor.run(args.terms, args.digits, seed_policy)
    except GapViolation as e:
        logger.error(str(e))
        for entry in e.diagnostics:
            logger.error(f"  step {entry}")
        return EXIT_GAP_VIOLATION

    document = build_document(result)
    if args.out:
        save_document(document, args.out)
    if args.plain:
        _emit(document.digits)
    elif not args.out:
        _emit(dump_document(document))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    document = load_document(args.input)
    verifier = Verifier(precision_factor=args.precision_factor, sample_count=args.samples,
                        seed=args.rng_seed, mr_rounds=args.mr_rounds)
    source = build_source(args.source, mr_rounds=args.mr_rounds) if args.source else None
    report = verifier.verify_all(document, source)
    _emit(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    for warning in report.warnings:
        logger.warning(warning)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_gaps(args: argparse.Namespace) -> int:
    if args.limit < 3:
        raise UsageError("--limit must be >= 3")
    source = build_source(args.source)
    terms = source.terms_upto(args.limit)
    table = maximal_gap_table(terms)

    payload = {"limit": args.limit, "source": source.describe(), "pair_count": max(0, len(terms) - 1)}
    if args.gap:
        report = scan_gaps(source, args.limit, GapFunction.parse(args.gap))
        payload.update(report.to_dict())
    if args.fit:
        params = _parse_pairs(args.fit, {"k"}, context="--fit")
        if "k" not in params:
            raise FamilySpecError("--fit needs k=")
        if params["k"] <= 0:
            raise FamilySpecError("--fit needs k > 0")
        if not isinstance(source, PrimeSource):
            raise FamilySpecError("--fit is defined for the primes source only")
        payload["k"] = str(params["k"])
        payload["fitted_constant"] = fit_gap_constant(args.limit, params["k"], sieve=source.sieve)

    if args.json:
        payload["maximal_gaps"] = [
            {key: str(value) for key, value in row.items()} for row in table.to_dict("records")
        ]
        _emit(json.dumps(payload, indent=2, sort_keys=True))
        return EXIT_OK

    lines = [f"{key}: {value}" for key, value in payload.items()
             if value is not None and key not in ("violations", "indeterminate")]
    if args.gap:
        lines.append(f"violations: {len(payload['violations'])}")
        lines.extend(f"  n={i}: {a} -> {b}" for i, a, b in payload["violations"])
    lines.append("")
    lines.append(table.to_string(index=False) if not table.empty else "(no gaps)")
    _emit("\n".join(lines))
    return EXIT_OK


def cmd_hypothesis(args: argparse.Namespace) -> int:
    source = build_source(args.source)
    family = parse_family(args.family, source)
    report = check_hypothesis(family, args.n_range, sample_count=args.samples,
                              seed=args.rng_seed, window=args.window, precision=args.precision)
    _emit(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "compute": cmd_compute,
    "verify": cmd_verify,
    "gaps": cmd_gaps,
    "hypothesis": cmd_hypothesis,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    configure_logging(args)

    try:
        return COMMANDS[args.command](args)
    except PrimeConstantError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return exit_code_for(e)
    except Exception:
        logger.exception(f"Internal error in {args.command}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
