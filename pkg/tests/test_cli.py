"""
End-to-end tests of the command line through ``main(argv)``.
"""
import json
import math

import pytest

from cli.main import (
    EXIT_ERROR,
    EXIT_EXHAUSTED,
    EXIT_GAP_VIOLATION,
    EXIT_OK,
    EXIT_PRECISION,
    EXIT_USAGE,
    EXIT_VERIFY_FAILED,
    main,
)
from config.settings import settings
from tests.conftest import MILLS_CHAIN, MILLS_DIGITS


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestCompute:
    def test_plain_digits(self, capsys):
        code, out = run(capsys, "compute", "--family", "mills", "--terms", "4", "--digits", "10", "--plain")
        assert code == EXIT_OK
        digits = out.strip()
        assert len(digits) >= 12
        assert MILLS_DIGITS.startswith(digits)

    def test_document_on_stdout(self, capsys):
        code, out = run(capsys, "compute", "--family", "mills", "--terms", "4", "--digits", "8")
        assert code == EXIT_OK
        document = json.loads(out)
        assert document["family_spec"] == "mills:n0=1"
        assert [int(e["v_n"]) for e in document["chain"]] == MILLS_CHAIN

    def test_zero_terms_is_a_usage_error(self, capsys):
        code, _ = run(capsys, "compute", "--family", "mills", "--terms", "0")
        assert code == EXIT_USAGE

    def test_unknown_family(self, capsys):
        code, out = run(capsys, "compute", "--family", "euler")
        assert code == EXIT_USAGE
        assert out == ""

    def test_gap_violation(self, capsys, write_sequence):
        path = write_sequence(range(1, 200, 2))
        code, out = run(capsys, "compute", "--family", "geometric:A=2", "--terms", "3",
                        "--source", f"file:{path}")
        assert code == EXIT_GAP_VIOLATION
        assert out == ""

    def test_empty_source(self, capsys, write_sequence):
        path = write_sequence([], header="# nothing")
        code, _ = run(capsys, "compute", "--family", "geometric:A=5", "--source", f"file:{path}")
        assert code == EXIT_EXHAUSTED

    def test_term_too_large(self, capsys):
        code, _ = run(capsys, "compute", "--family", "wright", "--terms", "5", "--digits", "3")
        assert code == EXIT_PRECISION

    def test_oversized_seed(self, capsys, monkeypatch):
        monkeypatch.setattr(settings, "MAX_TERM_BITS", 64)
        code, out = run(capsys, "compute", "--family",
                        "farhi-factorial:k=3/2,eps=1/2,c=1/1000,n0=40", "--terms", "2")
        assert code == EXIT_PRECISION
        assert out == ""

    def test_precision_bounds_are_checked(self, capsys):
        code, _ = run(capsys, "compute", "--family", "mills",
                      "--precision-start", "512", "--precision-max", "256")
        assert code == EXIT_USAGE

    def test_seed_index(self, capsys, write_sequence):
        path = write_sequence(range(1, 200, 2))
        code, out = run(capsys, "compute", "--family", "geometric:A=4", "--terms", "2",
                        "--digits", "1", "--seed-index", "1", "--source", f"file:{path}")
        assert code == EXIT_OK
        assert [e["v_n"] for e in json.loads(out)["chain"]] == ["3", "13"]

    def test_integrity_is_reproducible(self, capsys, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        for path in (first, second):
            assert run(capsys, "compute", "--family", "mills", "--terms", "4", "--digits", "8",
                       "--out", str(path))[0] == EXIT_OK
        a = json.loads(first.read_text(encoding="utf-8"))
        b = json.loads(second.read_text(encoding="utf-8"))
        assert a["integrity"] == b["integrity"]

    def test_resume(self, capsys, tmp_path):
        cache = str(tmp_path / "steps.jsonl")
        run(capsys, "compute", "--family", "mills", "--terms", "2", "--digits", "1", "--resume", cache)
        code, resumed = run(capsys, "compute", "--family", "mills", "--terms", "4", "--digits", "8",
                            "--resume", cache)
        _, fresh = run(capsys, "compute", "--family", "mills", "--terms", "4", "--digits", "8")
        assert code == EXIT_OK
        assert json.loads(resumed)["integrity"] == json.loads(fresh)["integrity"]

    def test_resume_with_other_family(self, capsys, tmp_path):
        cache = str(tmp_path / "steps.jsonl")
        run(capsys, "compute", "--family", "mills", "--terms", "2", "--digits", "1", "--resume", cache)
        code, _ = run(capsys, "compute", "--family", "wright", "--terms", "2", "--resume", cache)
        assert code == EXIT_USAGE


class TestVerify:
    @pytest.fixture
    def document_path(self, capsys, tmp_path):
        path = tmp_path / "mills.json"
        run(capsys, "compute", "--family", "mills", "--terms", "4", "--digits", "8", "--out", str(path))
        return path

    def test_round_trip(self, capsys, document_path):
        code, out = run(capsys, "verify", "--input", str(document_path), "--samples", "8")
        assert code == EXIT_OK
        assert json.loads(out)["passed"] is True

    def test_tampered_document(self, capsys, document_path):
        data = json.loads(document_path.read_text(encoding="utf-8"))
        data["chain"][2]["v_n"] = "1362"
        document_path.write_text(json.dumps(data), encoding="utf-8")
        code, out = run(capsys, "verify", "--input", str(document_path))
        assert code == EXIT_VERIFY_FAILED
        assert json.loads(out)["passed"] is False

    def test_malformed_document(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("[]", encoding="utf-8")
        code, _ = run(capsys, "verify", "--input", str(path))
        assert code == EXIT_USAGE


class TestGaps:
    def test_fit(self, capsys):
        code, out = run(capsys, "gaps", "--limit", "100", "--fit", "k=1", "--json")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["fitted_constant"] == pytest.approx(4 / math.log(7), rel=2e-6)
        assert payload["pair_count"] == 24

    def test_two_thirds_power(self, capsys):
        code, out = run(capsys, "gaps", "--limit", "100", "--g", "pow:2/3", "--json")
        payload = json.loads(out)
        assert code == EXIT_OK
        assert [0, "2", "3"] in payload["violations"]
        assert payload["max_gap"] == 8
        assert payload["maximal_gaps"][-1] == {"gap": "8", "term": "89", "next": "97"}

    def test_text_output(self, capsys):
        code, out = run(capsys, "gaps", "--limit", "30")
        assert code == EXIT_OK
        assert "pair_count: 9" in out

    def test_text_output_omits_unrequested_fields(self, capsys):
        code, out = run(capsys, "gaps", "--limit", "100", "--g", "pow:2/3")
        assert code == EXIT_OK
        assert "violations:" in out
        assert "fitted_constant" not in out
        assert "None" not in out

    def test_fit_needs_positive_k(self, capsys):
        assert run(capsys, "gaps", "--limit", "100", "--fit", "k=0")[0] == EXIT_USAGE

    def test_unexpected_error_is_internal(self, capsys, monkeypatch):
        def broken(terms):
            raise ValueError("broken table")

        monkeypatch.setattr("cli.main.maximal_gap_table", broken)
        code, out = run(capsys, "gaps", "--limit", "30")
        assert code == EXIT_ERROR
        assert out == ""

    def test_single_pair(self, capsys):
        code, out = run(capsys, "gaps", "--limit", "3", "--json")
        assert code == EXIT_OK
        assert json.loads(out)["pair_count"] == 1

    def test_limit_too_small(self, capsys):
        assert run(capsys, "gaps", "--limit", "2")[0] == EXIT_USAGE

    def test_fit_needs_primes(self, capsys, write_sequence):
        path = write_sequence([1, 2, 4, 8])
        code, _ = run(capsys, "gaps", "--limit", "8", "--fit", "k=1", "--source", f"file:{path}")
        assert code == EXIT_USAGE


class TestHypothesis:
    def test_mills_is_deterministic(self, capsys):
        argv = ("hypothesis", "--family", "mills", "--n-range", "0..5", "--samples", "16")
        first = run(capsys, *argv)
        second = run(capsys, *argv)
        assert first == second
        assert first[0] == EXIT_OK
        assert json.loads(first[1])["passed"] is True

    def test_wright(self, capsys):
        code, out = run(capsys, "hypothesis", "--family", "wright", "--n-range", "0..3", "--samples", "16")
        assert code == EXIT_OK
        assert json.loads(out)["violations"] == []

    def test_window(self, capsys):
        code, out = run(capsys, "hypothesis", "--family", "mills", "--n-range", "0..1",
                        "--samples", "4", "--window", "1..10")
        assert code == EXIT_OK
        assert json.loads(out)["window"] == ["1", "10"]

    def test_bad_range(self, capsys):
        assert run(capsys, "hypothesis", "--family", "mills", "--n-range", "5..1")[0] == EXIT_USAGE
