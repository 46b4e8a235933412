"""
Smoke check for a fresh install: dependencies, settings, a Mills
construction, a Wright verify round trip and a Bertrand gap scan.

Usage: python verify_setup.py
"""
import importlib
import logging
import sys

REQUIRED_MODULES = ("gmpy2", "numpy", "scipy", "pandas", "pydantic", "pydantic_settings", "dotenv")
MILLS_PREFIX = "1.3063778838"


def check_dependencies() -> str:
    for name in REQUIRED_MODULES:
        importlib.import_module(name)
    import gmpy2
    if not hasattr(gmpy2, "is_strong_bpsw_prp"):
        raise RuntimeError("gmpy2 2.1+ is required for BPSW tests")
    return f"{len(REQUIRED_MODULES)} packages importable, gmpy2 {gmpy2.version()}"


def check_settings() -> str:
    from config.settings import settings
    return (f"precision {settings.PRECISION_START}..{settings.PRECISION_MAX} bits, "
            f"sieve base limit {settings.SIEVE_BASE_LIMIT}")


def check_mills() -> str:
    from construction.constructor import run_construction
    from families.family import Mills
    from sequences.sources import PrimeSource

    result = run_construction(Mills(), PrimeSource(), term_count=4, digit_goal=10)
    if result.terms != [2, 11, 1361, 2521008887]:
        raise RuntimeError(f"unexpected chain {result.terms}")
    if not result.digits.digits.startswith(MILLS_PREFIX):
        raise RuntimeError(f"unexpected digits {result.digits.digits}")
    return f"chain {result.terms}, digits {result.digits.digits}"


def check_wright_round_trip() -> str:
    from construction.constructor import run_construction
    from evaluation.verifier import Verifier
    from families.family import Wright
    from sequences.sources import PrimeSource
    from storage.documents import build_document, dump_document, parse_document

    result = run_construction(Wright(), PrimeSource(), term_count=3, digit_goal=3)
    document = parse_document(dump_document(build_document(result)))
    report = Verifier(sample_count=8).verify_all(document)
    if not report.passed:
        raise RuntimeError(f"verification failed: {report.to_dict()}")
    return f"{len(report.checks)} checks passed on the serialized document"


def check_bertrand() -> str:
    from families.gap_function import GapFunction
    from sequences.gaps import scan_gaps
    from sequences.sources import PrimeSource

    report = scan_gaps(PrimeSource(), 10 ** 5, GapFunction.power(1))
    if not report.passed:
        raise RuntimeError(f"violations {report.violations[:5]}")
    return f"{report.pair_count} prime pairs, max gap {report.max_gap}"


CHECKS = [
    ("Dependencies", check_dependencies),
    ("Settings", check_settings),
    ("Mills construction", check_mills),
    ("Wright round trip", check_wright_round_trip),
    ("Bertrand scan", check_bertrand),
]


def main() -> int:
    logging.basicConfig(level=logging.WARNING)
    print("primeconst setup check")
    print("=" * 40)

    failed = []
    for name, check in CHECKS:
        try:
            print(f"[OK] {name}: {check()}")
        except Exception as e:
            print(f"[FAIL] {name}: {e}")
            failed.append(name)

    print("=" * 40)
    if failed:
        print(f"{len(failed)} of {len(CHECKS)} checks failed: {', '.join(failed)}")
        return 1
    print("All checks passed. Try:")
    print("  python -m cli.main compute --family mills --terms 5 --digits 20")
    print("  pytest -m 'not slow'")
    return 0


if __name__ == "__main__":
    sys.exit(main())
