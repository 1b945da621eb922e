import random

import pytest

from passagekit.errors import DataError
from passagekit.types import (
    Corpus,
    DatasetStats,
    LabeledPair,
    PairDataset,
    Passage,
    Question,
    Relevance,
    RunList,
    dataset_stats,
)


def _pair(qid, pid, positive=True, **kw):
    return LabeledPair(qid, pid, Relevance.from_bool(positive), **kw)


class TestBasicTypes:
    def test_relevance_has_exactly_two_states(self):
        assert {r.value for r in Relevance} == {"positive", "negative"}
        assert Relevance.from_bool(True).to_bool() is True
        assert Relevance.from_bool(False).to_bool() is False

    def test_passage_rejects_empty_id_and_blank_text(self):
        with pytest.raises(DataError):
            Passage("", "text")
        with pytest.raises(DataError):
            Passage("p1", "   \n\t ")

    def test_question_rejects_empty_id(self):
        with pytest.raises(DataError):
            Question("", "text")

    def test_pair_score_range(self):
        _pair("q", "p", score=0.0)
        _pair("q", "p", score=1.0)
        with pytest.raises(DataError):
            _pair("q", "p", score=1.0001)
        with pytest.raises(DataError):
            _pair("q", "p", score=-0.1)


class TestCorpus:
    def test_duplicate_id_rejected(self):
        with pytest.raises(DataError):
            Corpus([Passage("p1", "a"), Passage("p1", "b")])

    def test_insertion_order_preserved(self):
        corpus = Corpus([Passage("b", "x"), Passage("a", "y")])
        assert [p.id for p in corpus] == ["b", "a"]

    def test_indexed_text_title_composition(self):
        passage = Passage("p1", "treść", title="Tytuł")
        assert Corpus([passage], use_title=True).indexed_text(passage) == "Tytuł treść"
        assert Corpus([passage], use_title=False).indexed_text(passage) == "treść"
        untitled = Passage("p2", "treść")
        assert Corpus([untitled], use_title=True).indexed_text(untitled) == "treść"


class TestRunList:
    def test_from_scores_sorts_desc_with_ascending_id_ties(self):
        run = RunList.from_scores("q", [("pb", 1.0), ("pa", 1.0), ("pc", 2.0)])
        assert run.passage_ids() == ["pc", "pa", "pb"]

    def test_rejects_increasing_scores(self):
        with pytest.raises(DataError):
            RunList("q", (("pa", 1.0), ("pb", 2.0)))

    def test_rejects_tie_in_wrong_id_order(self):
        with pytest.raises(DataError):
            RunList("q", (("pb", 1.0), ("pa", 1.0)))

    def test_rejects_duplicate_passage(self):
        with pytest.raises(DataError):
            RunList("q", (("pa", 2.0), ("pa", 1.0)))

    def test_from_scores_random_always_valid(self):
        rng = random.Random(7)
        for _ in range(50):
            scored = [(f"p{i:02d}", rng.choice([0.0, 0.5, 1.0])) for i in range(20)]
            rng.shuffle(scored)
            RunList.from_scores("q", scored)  # constructor re-validates


class TestPairDataset:
    def test_duplicate_pair_rejected(self):
        with pytest.raises(DataError):
            PairDataset(pairs=[_pair("q1", "p1"), _pair("q1", "p1", positive=False)])

    def test_question_ids_include_pairless_questions(self):
        ds = PairDataset(
            pairs=[_pair("q1", "p1")],
            questions={"q1": Question("q1", "a"), "q9": Question("q9", "b")},
        )
        assert ds.question_ids() == ["q1", "q9"]

    def test_missing_texts_reported(self):
        ds = PairDataset(pairs=[_pair("q1", "p1")])
        with pytest.raises(DataError):
            ds.question_text("q1")
        with pytest.raises(DataError):
            ds.passage_text("p1")

    def test_merge_rejects_cross_file_duplicates(self):
        a = PairDataset(pairs=[_pair("q1", "p1")])
        b = PairDataset(pairs=[_pair("q1", "p1")])
        with pytest.raises(DataError):
            a.merge(b)


class TestDatasetStats:
    def test_hand_counted_synthetic(self):
        # q1 has one positive and one negative, q2 one negative
        ds = PairDataset(
            pairs=[
                _pair("q1", "p1", positive=True),
                _pair("q1", "p2", positive=False),
                _pair("q2", "p3", positive=False),
            ]
        )
        assert dataset_stats(ds) == DatasetStats(1, 2, 2, 1, 2, 3)

    def test_empty_dataset_all_zero(self):
        assert dataset_stats(PairDataset()) == DatasetStats(0, 0, 0, 0, 0, 0)

    def test_permutation_invariant(self):
        rng = random.Random(3)
        pairs = [
            _pair(f"q{i % 5}", f"p{i}", positive=bool(i % 3)) for i in range(30)
        ]
        base = dataset_stats(PairDataset(pairs=list(pairs)))
        for _ in range(10):
            rng.shuffle(pairs)
            assert dataset_stats(PairDataset(pairs=list(pairs))) == base

    def test_invariant_violations_rejected(self):
        with pytest.raises(DataError):
            DatasetStats(5, 0, 4, 0, 0, 0)  # with_positive > total
        with pytest.raises(DataError):
            DatasetStats(0, 0, 0, 1, 1, 3)  # rows do not partition
