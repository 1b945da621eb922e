import json
import random

import pytest

from passagekit import scoring
from passagekit.errors import DataError, ExternalServiceError, UsageError
from passagekit.scoring import ScorerSpec, jaccard_overlap, parse_scorer_spec, score_pairs
from passagekit.text import Lexicon


class TestJaccardOverlap:
    def test_identical_texts_score_one(self):
        assert jaccard_overlap("kot pije mleko", "kot pije mleko") == 1.0

    def test_disjoint_vocabulary_scores_zero(self):
        assert jaccard_overlap("kot pies", "ryba ptak") == 0.0

    def test_hand_jaccard_quarter(self):
        # q tokens {a, b}, p tokens {b, c, d} -> |{b}| / |{a,b,c,d}| = 0.25
        assert jaccard_overlap("a b", "b c d") == 0.25

    def test_symmetry_and_duplication_invariance(self):
        rng = random.Random(9)
        vocab = ["kot", "pies", "dom", "las", "mysz"]
        for _ in range(30):
            q = " ".join(rng.choices(vocab, k=rng.randint(1, 6)))
            p = " ".join(rng.choices(vocab, k=rng.randint(1, 6)))
            assert jaccard_overlap(q, p) == jaccard_overlap(p, q)
            assert jaccard_overlap(q + " " + q, p) == jaccard_overlap(q, p)

    def test_lemma_sets_not_surface_sets(self):
        lex = Lexicon({"kota": "kot"})
        assert jaccard_overlap("kota", "kot", lex) == 1.0
        assert jaccard_overlap("kota", "kot") == 0.0


class TestScorerSpec:
    def test_kind_field_pairing_enforced(self):
        with pytest.raises(UsageError):
            ScorerSpec(kind="remote")  # no endpoint
        with pytest.raises(UsageError):
            ScorerSpec(kind="file_scores")  # no file
        with pytest.raises(UsageError):
            ScorerSpec(kind="overlap_oracle", endpoint="http://x")
        with pytest.raises(UsageError):
            ScorerSpec(kind="magic")
        with pytest.raises(UsageError):
            ScorerSpec(kind="overlap_oracle", batch_size=0)

    def test_parse_forms(self):
        assert parse_scorer_spec("overlap").kind == "overlap_oracle"
        spec = parse_scorer_spec("file:scores.jsonl")
        assert (spec.kind, spec.score_file) == ("file_scores", "scores.jsonl")
        spec = parse_scorer_spec("remote:http://localhost:8080")
        assert (spec.kind, spec.endpoint) == ("remote", "http://localhost:8080")
        with pytest.raises(UsageError):
            parse_scorer_spec("mystery")


class TestScorePairs:
    def test_overlap_backend(self):
        spec = ScorerSpec(kind="overlap_oracle")
        scores = score_pairs(spec, [("a b", "b c d"), ("x", "x")])
        assert scores == [0.25, 1.0]

    def test_permuting_input_permutes_output(self):
        spec = ScorerSpec(kind="overlap_oracle")
        pairs = [("a b", "b c d"), ("x", "x"), ("kot", "pies")]
        fwd = score_pairs(spec, pairs)
        rev = score_pairs(spec, pairs[::-1])
        assert rev == fwd[::-1]

    def test_file_backend_replays_and_names_missing_pair(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        path.write_text(
            json.dumps({"question_id": "q1", "passage_id": "p1", "score": 0.7}) + "\n"
        )
        spec = ScorerSpec(kind="file_scores", score_file=str(path))
        assert score_pairs(spec, [("q", "p")], pair_ids=[("q1", "p1")]) == [0.7]
        with pytest.raises(DataError, match=r"q2.*p9"):
            score_pairs(spec, [("q", "p")], pair_ids=[("q2", "p9")])

    def test_file_backend_requires_ids(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        path.write_text("")
        spec = ScorerSpec(kind="file_scores", score_file=str(path))
        with pytest.raises(DataError, match="keys"):
            score_pairs(spec, [("q", "p")])

    def test_out_of_range_score_rejected(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        path.write_text(
            json.dumps({"question_id": "q1", "passage_id": "p1", "score": 1.5}) + "\n"
        )
        spec = ScorerSpec(kind="file_scores", score_file=str(path))
        with pytest.raises(DataError, match=r"outside \[0, 1\]"):
            score_pairs(spec, [("q", "p")], pair_ids=[("q1", "p1")])

    def test_empty_input_empty_output(self):
        assert score_pairs(ScorerSpec(kind="overlap_oracle"), []) == []


class _FakeResponse:
    def __init__(self, scores):
        self._scores = scores

    def raise_for_status(self):
        pass

    def json(self):
        return {"scores": self._scores}


class TestRemoteBackend:
    @pytest.fixture(autouse=True)
    def no_sleep(self, monkeypatch):
        monkeypatch.setattr(scoring.time, "sleep", lambda _s: None)

    def test_batching_and_order(self, monkeypatch):
        calls = []

        def fake_post(url, json=None, timeout=None):
            calls.append(json["pairs"])
            return _FakeResponse([0.5] * len(json["pairs"]))

        monkeypatch.setattr(scoring.requests, "post", fake_post)
        spec = ScorerSpec(kind="remote", endpoint="http://svc", batch_size=2)
        scores = score_pairs(spec, [("q", f"p{i}") for i in range(5)])
        assert scores == [0.5] * 5
        assert [len(c) for c in calls] == [2, 2, 1]

    def test_retry_then_success(self, monkeypatch):
        attempts = []

        def flaky_post(url, json=None, timeout=None):
            attempts.append(1)
            if len(attempts) < 3:
                raise scoring.requests.ConnectionError("down")
            return _FakeResponse([0.25] * len(json["pairs"]))

        monkeypatch.setattr(scoring.requests, "post", flaky_post)
        spec = ScorerSpec(kind="remote", endpoint="http://svc")
        assert score_pairs(spec, [("q", "p")]) == [0.25]
        assert len(attempts) == 3

    def test_retries_exhausted(self, monkeypatch):
        def dead_post(url, json=None, timeout=None):
            raise scoring.requests.ConnectionError("down")

        monkeypatch.setattr(scoring.requests, "post", dead_post)
        spec = ScorerSpec(kind="remote", endpoint="http://svc")
        with pytest.raises(ExternalServiceError, match="after 3 attempts"):
            score_pairs(spec, [("q", "p")])

    def test_wrong_length_response_aborts(self, monkeypatch):
        monkeypatch.setattr(
            scoring.requests, "post", lambda url, json=None, timeout=None: _FakeResponse([0.5])
        )
        spec = ScorerSpec(kind="remote", endpoint="http://svc")
        with pytest.raises(ExternalServiceError, match="scores for 2 pairs"):
            score_pairs(spec, [("q", "p1"), ("q", "p2")])

    def test_out_of_range_remote_score(self, monkeypatch):
        monkeypatch.setattr(
            scoring.requests, "post", lambda url, json=None, timeout=None: _FakeResponse([1.2])
        )
        spec = ScorerSpec(kind="remote", endpoint="http://svc")
        with pytest.raises(DataError, match=r"outside \[0, 1\]"):
            score_pairs(spec, [("q", "p")])
