"""
Tests for result documents and the resume cache.
"""
import json

import pytest

from construction.constructor import Constructor, run_construction
from families.family import LambdaPower, Mills
from storage.documents import (
    CacheEntry,
    build_document,
    canonical_json,
    check_integrity,
    dump_document,
    load_document,
    parse_document,
    save_document,
)
from sequences.sources import FileSequenceSource
from storage.step_cache import StepCache
from tests.conftest import MILLS_CHAIN
from utils.errors import CacheMismatch, DocumentError, IntegrityError


@pytest.fixture
def mills_result(primes):
    return run_construction(Mills(), primes, term_count=4, digit_goal=8)


def cache_line(n, v, family_spec="mills:n0=1", source="primes"):
    entry = CacheEntry(family_spec=family_spec, source=source, n=n, v_n=str(v), precision=128)
    return entry.model_dump_json()


class TestCanonicalJson:
    def test_key_order_does_not_matter(self):
        assert canonical_json({"b": 1, "a": [1, 2]}) == canonical_json({"a": [1, 2], "b": 1})

    def test_compact(self):
        assert canonical_json({"a": "x", "b": 2}) == '{"a":"x","b":2}'


class TestResultDocument:
    def test_big_integers_are_strings(self, mills_result):
        document = build_document(mills_result)
        data = json.loads(dump_document(document))
        assert [entry["v_n"] for entry in data["chain"]] == [str(v) for v in MILLS_CHAIN]
        assert data["family_spec"] == "mills:n0=1"
        assert data["gap_function"] == "pow:2/3"
        assert data["source"] == "primes"

    def test_integrity_ignores_timestamp(self, mills_result):
        first = build_document(mills_result)
        second = build_document(mills_result, timestamp=False)
        assert first.integrity == second.integrity
        assert second.created_at is None
        check_integrity(first)

    def test_deterministic_without_timestamp(self, mills_result):
        first = dump_document(build_document(mills_result, timestamp=False))
        second = dump_document(build_document(mills_result, timestamp=False))
        assert first == second

    def test_tampering_is_detected(self, mills_result):
        document = build_document(mills_result)
        document.bracket.hi = "1.4"
        with pytest.raises(IntegrityError):
            check_integrity(document)

    def test_save_and_load(self, mills_result, tmp_path):
        document = build_document(mills_result)
        path = tmp_path / "out" / "mills.json"
        save_document(document, path)
        loaded = load_document(path)
        assert loaded == document
        check_integrity(loaded)

    def test_not_json(self):
        with pytest.raises(DocumentError):
            parse_document("{not json")

    def test_missing_fields(self):
        with pytest.raises(DocumentError):
            parse_document('{"family_spec": "mills"}')

    def test_missing_file(self, tmp_path):
        with pytest.raises(DocumentError):
            load_document(tmp_path / "absent.json")


class TestStepCache:
    def test_append_and_reload(self, primes, tmp_path):
        path = tmp_path / "mills.jsonl"
        with StepCache(path, "mills:n0=1", "primes") as cache:
            Constructor(Mills(), primes).run(term_count=3, digit_goal=2, on_step=cache.append)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 3
        with StepCache(path, "mills:n0=1", "primes") as cache:
            assert [int(e.v_n) for e in cache.entries] == MILLS_CHAIN[:3]
            assert [e.n for e in cache.entries] == [1, 2, 3]

    def test_resume_matches_a_fresh_run(self, primes, tmp_path):
        path = tmp_path / "mills.jsonl"
        with StepCache(path, "mills:n0=1", "primes") as cache:
            Constructor(Mills(), primes).run(term_count=2, digit_goal=2, on_step=cache.append)
        with StepCache(path, "mills:n0=1", "primes") as cache:
            resumed = Constructor(Mills(), primes).run(
                term_count=4, digit_goal=8, resume=cache.entries, on_step=cache.append)
            assert len(cache.entries) == 4
        fresh = run_construction(Mills(), primes, term_count=4, digit_goal=8)
        assert resumed.terms == fresh.terms == MILLS_CHAIN
        assert resumed.diagnostics == fresh.diagnostics
        assert (resumed.bracket_lo, resumed.bracket_hi) == (fresh.bracket_lo, fresh.bracket_hi)
        assert build_document(resumed).integrity == build_document(fresh).integrity

    def test_other_family_is_rejected(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        path.write_text(cache_line(1, 2) + "\n", encoding="utf-8")
        with pytest.raises(CacheMismatch):
            StepCache(path, "wright:n0=0", "primes").open()

    def test_malformed_line_reports_its_number(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        path.write_text(cache_line(1, 2) + "\n{broken\n", encoding="utf-8")
        with pytest.raises(DocumentError, match="line 2"):
            StepCache(path, "mills:n0=1", "primes").open()

    def test_second_session_is_locked_out(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        with StepCache(path, "mills:n0=1", "primes"):
            with pytest.raises(DocumentError, match="locked"):
                StepCache(path, "mills:n0=1", "primes").open()

    def test_replay_rejects_non_terms(self, primes, tmp_path):
        path = tmp_path / "cache.jsonl"
        path.write_text(cache_line(1, 2) + "\n" + cache_line(2, 12) + "\n", encoding="utf-8")
        with StepCache(path, "mills:n0=1", "primes") as cache:
            with pytest.raises(CacheMismatch):
                Constructor(Mills(), primes).run(term_count=3, resume=cache.entries)

    def test_replay_rejects_a_skipped_prime(self, primes, tmp_path):
        # 1367 is prime but 1361 is the least prime >= 11^3
        path = tmp_path / "cache.jsonl"
        lines = [cache_line(1, 2), cache_line(2, 11), cache_line(3, 1367)]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with StepCache(path, "mills:n0=1", "primes") as cache:
            with pytest.raises(CacheMismatch, match="least term"):
                Constructor(Mills(), primes).run(term_count=4, resume=cache.entries)

    def test_replay_rejects_a_seed_below_lambda(self, write_sequence):
        source = FileSequenceSource.load(write_sequence(range(1, 100, 2)))
        entry = CacheEntry(family_spec="lambda-power:lambda=1,M=3,n0=1", source="file",
                           n=1, v_n="3", precision=128)
        with pytest.raises(CacheMismatch, match="not in"):
            Constructor(LambdaPower(1, 3), source).replay([entry])

    def test_append_requires_open(self, primes, tmp_path):
        state = Constructor(Mills(), primes).init()
        with pytest.raises(RuntimeError):
            StepCache(tmp_path / "c.jsonl", "mills:n0=1", "primes").append(state, {})
