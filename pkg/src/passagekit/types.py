"""Domain types: passages, questions, labeled pairs, corpora, run lists.

Everything here is treated as immutable after construction and validates
its own invariants eagerly, so downstream code never has to re-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .errors import DataError


class Relevance(Enum):
    """Binary pair label. Persisted pairs are never 'unknown'."""

    POSITIVE = "positive"
    NEGATIVE = "negative"

    @classmethod
    def from_bool(cls, relevant: bool) -> "Relevance":
        return cls.POSITIVE if relevant else cls.NEGATIVE

    def to_bool(self) -> bool:
        return self is Relevance.POSITIVE


@dataclass(frozen=True)
class Passage:
    """A retrievable text unit with an optional title.

    ``lemmas`` optionally caches the lemma stream as token ids under some
    Lexicon; it is carried along, never interpreted here.
    """

    id: str
    text: str
    title: str | None = None
    lemmas: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise DataError("passage id must be non-empty")
        if not self.text.strip():
            raise DataError(f"passage {self.id!r}: text empty after trimming")


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    lemmas: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise DataError("question id must be non-empty")


@dataclass(frozen=True)
class LabeledPair:
    """One (question, passage, relevance) row of a training dataset."""

    question_id: str
    passage_id: str
    relevance: Relevance
    answer: str | None = None
    score: float | None = None

    def __post_init__(self) -> None:
        if not self.question_id or not self.passage_id:
            raise DataError("pair ids must be non-empty")
        if self.score is not None and not (0.0 <= self.score <= 1.0):
            raise DataError(
                f"pair ({self.question_id}, {self.passage_id}): "
                f"score {self.score} outside [0, 1]"
            )


class Corpus:
    """Ordered, id-unique collection of passages.

    ``use_title`` controls whether the title participates in the text seen
    by indexing and scoring (title + single space + text).
    """

    def __init__(self, passages: Iterable[Passage], use_title: bool = False):
        self.passages: list[Passage] = []
        self._by_id: dict[str, Passage] = {}
        self.use_title = use_title
        for p in passages:
            if p.id in self._by_id:
                raise DataError(f"duplicate passage id {p.id!r} in corpus")
            self._by_id[p.id] = p
            self.passages.append(p)

    def __len__(self) -> int:
        return len(self.passages)

    def __iter__(self) -> Iterator[Passage]:
        return iter(self.passages)

    def __contains__(self, passage_id: str) -> bool:
        return passage_id in self._by_id

    def get(self, passage_id: str) -> Passage:
        try:
            return self._by_id[passage_id]
        except KeyError:
            raise DataError(f"unknown passage id {passage_id!r}") from None

    def indexed_text(self, passage: Passage) -> str:
        """Text surface used for indexing/scoring, honoring use_title."""
        if self.use_title and passage.title:
            return passage.title + " " + passage.text
        return passage.text


@dataclass(frozen=True)
class RunList:
    """Ranked retrieval result for one question.

    Hits are (passage_id, score), scores non-increasing, equal scores
    ordered by ascending passage_id, no duplicate passage ids. Construct
    from unsorted scores with :meth:`from_scores`.
    """

    question_id: str
    hits: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        prev: tuple[str, float] | None = None
        for pid, score in self.hits:
            if pid in seen:
                raise DataError(f"run {self.question_id!r}: duplicate hit {pid!r}")
            seen.add(pid)
            if prev is not None:
                prev_pid, prev_score = prev
                if score > prev_score:
                    raise DataError(
                        f"run {self.question_id!r}: scores increase at {pid!r}"
                    )
                if score == prev_score and pid < prev_pid:
                    raise DataError(
                        f"run {self.question_id!r}: tie ({prev_pid!r}, {pid!r}) "
                        "not in ascending passage_id order"
                    )
            prev = (pid, score)

    @classmethod
    def from_scores(
        cls, question_id: str, scored: Iterable[tuple[str, float]]
    ) -> "RunList":
        """Sort (passage_id, score) pairs into canonical run order."""
        ordered = sorted(scored, key=lambda h: (-h[1], h[0]))
        return cls(question_id, tuple(ordered))

    def passage_ids(self) -> list[str]:
        return [pid for pid, _ in self.hits]


@dataclass(frozen=True)
class DatasetStats:
    """Per-dataset counts: unique questions with >=1 positive/negative
    pair, total unique questions, and pair-row counts per relevance."""

    questions_with_positive: int
    questions_with_negative: int
    questions_total: int
    passages_positive: int
    passages_negative: int
    passages_total: int

    def __post_init__(self) -> None:
        if self.questions_with_positive > self.questions_total:
            raise DataError("questions_with_positive exceeds questions_total")
        if self.passages_positive + self.passages_negative != self.passages_total:
            raise DataError("passage counts do not partition by relevance")


@dataclass
class PairDataset:
    """Labeled pairs plus side tables of question/passage records.

    Side tables may be partial: TREC qrels carry no texts, so pairs loaded
    from them reference ids only. Operations that need texts raise
    DataError naming the missing id.
    """

    pairs: list[LabeledPair] = field(default_factory=list)
    questions: dict[str, Question] = field(default_factory=dict)
    passages: dict[str, Passage] = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen: set[tuple[str, str]] = set()
        for pair in self.pairs:
            key = (pair.question_id, pair.passage_id)
            if key in seen:
                raise DataError(f"duplicate pair {key}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.pairs)

    def question_ids(self) -> list[str]:
        """All known question ids (side table plus pair rows), sorted."""
        ids = set(self.questions)
        ids.update(p.question_id for p in self.pairs)
        return sorted(ids)

    def question_text(self, question_id: str) -> str:
        q = self.questions.get(question_id)
        if q is None or not q.text:
            raise DataError(f"no text available for question {question_id!r}")
        return q.text

    def passage_text(self, passage_id: str) -> str:
        p = self.passages.get(passage_id)
        if p is None:
            raise DataError(f"no text available for passage {passage_id!r}")
        return p.text

    def positives_by_question(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {}
        for pair in self.pairs:
            if pair.relevance is Relevance.POSITIVE:
                out.setdefault(pair.question_id, set()).add(pair.passage_id)
        return out

    def merge(self, other: "PairDataset") -> "PairDataset":
        """Union of two datasets; duplicate (qid, pid) rows are rejected."""
        merged = PairDataset(
            pairs=self.pairs + other.pairs,
            questions={**self.questions, **other.questions},
            passages={**self.passages, **other.passages},
        )
        return merged


def dataset_stats(dataset: PairDataset) -> DatasetStats:
    """Count questions/passages the way training-set summaries report them.

    Question counts are unique questions with at least one pair of the
    given relevance; passage counts are pair rows per relevance. Questions
    known to the side table but appearing in no pair still count toward
    the total.
    """
    with_pos: set[str] = set()
    with_neg: set[str] = set()
    n_pos = 0
    n_neg = 0
    for pair in dataset.pairs:
        if pair.relevance is Relevance.POSITIVE:
            with_pos.add(pair.question_id)
            n_pos += 1
        else:
            with_neg.add(pair.question_id)
            n_neg += 1
    return DatasetStats(
        questions_with_positive=len(with_pos),
        questions_with_negative=len(with_neg),
        questions_total=len(dataset.question_ids()),
        passages_positive=n_pos,
        passages_negative=n_neg,
        passages_total=n_pos + n_neg,
    )
