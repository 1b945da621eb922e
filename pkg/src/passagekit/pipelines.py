"""Training-data construction: question-passage matching, hard-negative
mining, denoising, NLI conversion, and trainer-file export.

All pipelines are deterministic: work is parallelizable over questions,
but outputs are canonicalized (question_id, then passage_id) so the
thread count never changes a result.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

from . import io as pkio
from .bm25 import InvertedIndex, search
from .errors import DataError, UsageError
from .scoring import ScorerSpec, jaccard_overlap, score_pairs
from .text import Lexicon, analyze, tokenize
from .types import Corpus, LabeledPair, PairDataset, Passage, Question, Relevance

T = TypeVar("T")
U = TypeVar("U")


def _map_ordered(fn: Callable[[T], U], items: Sequence[T], threads: int) -> list[U]:
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# ---------------------------------------------------------------------------
# configs


@dataclass(frozen=True)
class MatchConfig:
    """Candidate funnel sizes and the verification gate for matching."""

    bm25_top: int = 100
    rerank_top: int = 5
    verify_threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.bm25_top < 1 or self.rerank_top < 1:
            raise UsageError("bm25_top and rerank_top must be >= 1")
        if self.rerank_top > self.bm25_top:
            raise UsageError("rerank_top cannot exceed bm25_top")
        if not 0.0 <= self.verify_threshold <= 1.0:
            raise UsageError("verify_threshold must be in [0, 1]")

    @classmethod
    def from_dict(cls, raw: dict) -> "MatchConfig":
        return cls(**{k: raw[k] for k in ("bm25_top", "rerank_top", "verify_threshold") if k in raw})


@dataclass(frozen=True)
class MineConfig:
    """How many BM25 candidates to consider and where irrelevance starts."""

    bm25_top: int = 10
    negative_threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.bm25_top < 1:
            raise UsageError("bm25_top must be >= 1")

    @classmethod
    def from_dict(cls, raw: dict) -> "MineConfig":
        return cls(**{k: raw[k] for k in ("bm25_top", "negative_threshold") if k in raw})


@dataclass(frozen=True)
class DenoiseConfig:
    """Thresholds for the noisy-pair filter cascade.

    Length bounds are in surface tokens; 512 passage tokens tracks the
    usual encoder context limit. Score gates keep positives scoring at
    least pos_floor and negatives scoring at most neg_ceiling.
    """

    min_q_tokens: int = 3
    max_q_tokens: int = 64
    min_p_tokens: int = 10
    max_p_tokens: int = 512
    max_fanout: int = 10
    max_overlap: float = 0.9
    pos_floor: float = 0.10
    neg_ceiling: float = 0.90
    question_blacklist: frozenset[str] = frozenset()
    word_blacklist: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.min_q_tokens > self.max_q_tokens:
            raise UsageError("min_q_tokens exceeds max_q_tokens")
        if self.min_p_tokens > self.max_p_tokens:
            raise UsageError("min_p_tokens exceeds max_p_tokens")
        for name in ("max_overlap", "pos_floor", "neg_ceiling"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise UsageError(f"{name} must be in [0, 1], got {value}")
        if self.pos_floor >= self.neg_ceiling:
            raise UsageError("pos_floor must be below neg_ceiling")
        if self.max_fanout < 1:
            raise UsageError("max_fanout must be >= 1")

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str | Path | None = None) -> "DenoiseConfig":
        """Build from a config-file section.

        ``question_blacklist_file`` / ``word_blacklist_file`` entries are
        newline-delimited files, resolved relative to the config file.
        """
        base = Path(base_dir) if base_dir is not None else Path(".")
        kwargs: dict = {}
        for key in (
            "min_q_tokens",
            "max_q_tokens",
            "min_p_tokens",
            "max_p_tokens",
            "max_fanout",
            "max_overlap",
            "pos_floor",
            "neg_ceiling",
        ):
            if key in raw:
                kwargs[key] = raw[key]
        if "question_blacklist_file" in raw:
            kwargs["question_blacklist"] = frozenset(
                pkio.load_wordlist(base / raw["question_blacklist_file"])
            )
        if "word_blacklist_file" in raw:
            kwargs["word_blacklist"] = frozenset(
                pkio.load_wordlist(base / raw["word_blacklist_file"])
            )
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# matching


def match_questions(
    questions: list[Question],
    corpus: Corpus,
    index: InvertedIndex,
    scorer: ScorerSpec,
    verifier: ScorerSpec,
    cfg: MatchConfig,
    lexicon: Lexicon | None = None,
    threads: int = 1,
) -> list[LabeledPair]:
    """Match questions to corpus passages via BM25 -> rerank -> verify.

    Per question: BM25 selects bm25_top candidates, the scorer reranks
    them, the best rerank_top are gated by the verifier; passing pairs
    come out Positive, failing ones Negative, each carrying the
    verification score.
    """
    if lexicon is None:
        lexicon = index.lexicon()

    def candidates(question: Question) -> list[str]:
        tokens = analyze(question.text, lexicon, mode=index.analyzed)
        return search(index, tokens, cfg.bm25_top, query_id=question.id).passage_ids()

    candidate_lists = _map_ordered(candidates, questions, threads)

    flat_pairs: list[tuple[str, str]] = []
    flat_ids: list[tuple[str, str]] = []
    for question, pids in zip(questions, candidate_lists):
        for pid in pids:
            flat_pairs.append((question.text, corpus.indexed_text(corpus.get(pid))))
            flat_ids.append((question.id, pid))
    rerank_scores = score_pairs(scorer, flat_pairs, pair_ids=flat_ids, lexicon=lexicon)

    selected_pairs: list[tuple[str, str]] = []
    selected_ids: list[tuple[str, str]] = []
    cursor = 0
    for question, pids in zip(questions, candidate_lists):
        scored = list(zip(pids, rerank_scores[cursor : cursor + len(pids)]))
        cursor += len(pids)
        scored.sort(key=lambda h: (-h[1], h[0]))
        for pid, _score in scored[: cfg.rerank_top]:
            selected_pairs.append((question.text, corpus.indexed_text(corpus.get(pid))))
            selected_ids.append((question.id, pid))

    verify_scores = score_pairs(verifier, selected_pairs, pair_ids=selected_ids, lexicon=lexicon)

    out = [
        LabeledPair(
            qid,
            pid,
            Relevance.from_bool(v >= cfg.verify_threshold),
            score=v,
        )
        for (qid, pid), v in zip(selected_ids, verify_scores)
    ]
    out.sort(key=lambda p: (p.question_id, p.passage_id))
    return out


# ---------------------------------------------------------------------------
# hard-negative mining


def mine_hard_negatives(
    dataset: PairDataset,
    corpus: Corpus,
    index: InvertedIndex,
    scorer: ScorerSpec,
    cfg: MineConfig,
    lexicon: Lexicon | None = None,
    threads: int = 1,
) -> list[LabeledPair]:
    """Mine lexically-close irrelevant passages as training negatives.

    Per question: take the BM25 top candidates, drop passages already
    Positive for that question, drop candidates the scorer still finds
    relevant (score >= negative_threshold), and emit the rest as
    Negative with the score recorded. Never emits a pair that is
    Positive in the input.
    """
    if lexicon is None:
        lexicon = index.lexicon()
    positives = dataset.positives_by_question()
    question_ids = dataset.question_ids()

    def candidates(qid: str) -> list[str]:
        tokens = analyze(dataset.question_text(qid), lexicon, mode=index.analyzed)
        hits = search(index, tokens, cfg.bm25_top, query_id=qid).passage_ids()
        known_positive = positives.get(qid, set())
        return [pid for pid in hits if pid not in known_positive]

    candidate_lists = _map_ordered(candidates, question_ids, threads)

    flat_pairs: list[tuple[str, str]] = []
    flat_ids: list[tuple[str, str]] = []
    for qid, pids in zip(question_ids, candidate_lists):
        qtext = dataset.question_text(qid)
        for pid in pids:
            flat_pairs.append((qtext, corpus.indexed_text(corpus.get(pid))))
            flat_ids.append((qid, pid))
    scores = score_pairs(scorer, flat_pairs, pair_ids=flat_ids, lexicon=lexicon)

    out = [
        LabeledPair(qid, pid, Relevance.NEGATIVE, score=s)
        for (qid, pid), s in zip(flat_ids, scores)
        if s < cfg.negative_threshold
    ]
    out.sort(key=lambda p: (p.question_id, p.passage_id))
    return out


# ---------------------------------------------------------------------------
# denoising

FILTER_NAMES = ("length", "fan_out", "overlap", "blacklist", "score_floor", "score_ceiling")


@dataclass
class DenoiseReport:
    """Which pairs were rejected and by which filter (first to fire)."""

    rejections: list[tuple[LabeledPair, str]] = field(default_factory=list)
    n_input: int = 0
    n_kept: int = 0
    n_input_positive: int = 0

    @property
    def counts(self) -> dict[str, int]:
        out = {name: 0 for name in FILTER_NAMES}
        for _pair, name in self.rejections:
            out[name] += 1
        return out

    @property
    def rejected_fraction(self) -> float:
        return len(self.rejections) / self.n_input if self.n_input else 0.0

    @property
    def positive_rejected_fraction(self) -> float:
        """Fraction of input Positive pairs discarded (the headline
        figure to sanity-check a filtering run against)."""
        if not self.n_input_positive:
            return 0.0
        rejected_pos = sum(
            1 for pair, _name in self.rejections if pair.relevance is Relevance.POSITIVE
        )
        return rejected_pos / self.n_input_positive

    def to_dict(self) -> dict:
        return {
            "n_input": self.n_input,
            "n_kept": self.n_kept,
            "n_rejected": len(self.rejections),
            "counts": self.counts,
            "rejected_fraction": self.rejected_fraction,
            "positive_rejected_fraction": self.positive_rejected_fraction,
        }

    def format_summary(self) -> str:
        lines = [f"kept {self.n_kept} of {self.n_input} pairs"]
        for name in FILTER_NAMES:
            lines.append(f"  {name:<14} rejected {self.counts[name]}")
        lines.append(f"rejected fraction: {100.0 * self.rejected_fraction:.2f}%")
        lines.append(
            f"positive pairs rejected: {100.0 * self.positive_rejected_fraction:.2f}%"
        )
        return "\n".join(lines)


def denoise(
    dataset: PairDataset,
    scorer: ScorerSpec,
    cfg: DenoiseConfig,
    lexicon: Lexicon | None = None,
) -> tuple[list[LabeledPair], DenoiseReport]:
    """Run the filter cascade; returns (kept pairs, rejection report).

    Stages run in fixed order -- lengths, positive fan-out, question/
    passage overlap, blacklists, then scorer thresholds -- and each stage
    sees only the survivors of the previous one, so the expensive scorer
    runs last and on the smallest set. Kept pairs pass through unchanged:
    kept + rejected is exactly the input.
    """
    if lexicon is None:
        lexicon = Lexicon.empty()
    report = DenoiseReport(
        n_input=len(dataset.pairs),
        n_input_positive=sum(
            1 for p in dataset.pairs if p.relevance is Relevance.POSITIVE
        ),
    )

    def qtext(pair: LabeledPair) -> str:
        return dataset.question_text(pair.question_id)

    def ptext(pair: LabeledPair) -> str:
        return dataset.passage_text(pair.passage_id)

    survivors = list(dataset.pairs)

    # 1. length bounds on question and passage token counts
    token_counts: dict[str, int] = {}

    def count_tokens(text: str) -> int:
        if text not in token_counts:
            token_counts[text] = len(tokenize(text))
        return token_counts[text]

    def length_ok(pair: LabeledPair) -> bool:
        n_q = count_tokens(qtext(pair))
        n_p = count_tokens(ptext(pair))
        return (
            cfg.min_q_tokens <= n_q <= cfg.max_q_tokens
            and cfg.min_p_tokens <= n_p <= cfg.max_p_tokens
        )

    survivors = _apply_filter(survivors, length_ok, "length", report)

    # 2. passages positively linked to too many questions
    fanout: dict[str, int] = {}
    for pair in survivors:
        if pair.relevance is Relevance.POSITIVE:
            fanout[pair.passage_id] = fanout.get(pair.passage_id, 0) + 1

    def fanout_ok(pair: LabeledPair) -> bool:
        if pair.relevance is not Relevance.POSITIVE:
            return True
        return fanout[pair.passage_id] <= cfg.max_fanout

    survivors = _apply_filter(survivors, fanout_ok, "fan_out", report)

    # 3. positive passages nearly identical to their question
    def overlap_ok(pair: LabeledPair) -> bool:
        if pair.relevance is not Relevance.POSITIVE:
            return True
        return jaccard_overlap(qtext(pair), ptext(pair), lexicon) <= cfg.max_overlap

    survivors = _apply_filter(survivors, overlap_ok, "overlap", report)

    # 4. blacklisted questions (whole text) and words (question tokens)
    def blacklist_ok(pair: LabeledPair) -> bool:
        text = qtext(pair)
        if text.strip() in cfg.question_blacklist:
            return False
        return not any(tok in cfg.word_blacklist for tok in tokenize(text))

    survivors = _apply_filter(survivors, blacklist_ok, "blacklist", report)

    # 5. scorer gates: positives must clear the floor, negatives must
    # stay under the ceiling
    if survivors:
        scores = score_pairs(
            scorer,
            [(qtext(p), ptext(p)) for p in survivors],
            pair_ids=[(p.question_id, p.passage_id) for p in survivors],
            lexicon=lexicon,
        )
        kept: list[LabeledPair] = []
        for pair, s in zip(survivors, scores):
            if pair.relevance is Relevance.POSITIVE and s < cfg.pos_floor:
                report.rejections.append((pair, "score_floor"))
            elif pair.relevance is Relevance.NEGATIVE and s > cfg.neg_ceiling:
                report.rejections.append((pair, "score_ceiling"))
            else:
                kept.append(pair)
        survivors = kept

    report.n_kept = len(survivors)
    return survivors, report


def _apply_filter(
    pairs: list[LabeledPair],
    keep: Callable[[LabeledPair], bool],
    name: str,
    report: DenoiseReport,
) -> list[LabeledPair]:
    kept = []
    for pair in pairs:
        if keep(pair):
            kept.append(pair)
        else:
            report.rejections.append((pair, name))
    return kept


# ---------------------------------------------------------------------------
# NLI conversion

_NLI_LABELS = ("entailment", "contradiction", "neutral")


def convert_nli(records: Iterable[tuple[str, str, str]]) -> PairDataset:
    """Turn (premise, hypothesis, label) triples into labeled pairs.

    The premise becomes a yes/no question ("Czy " prefix, terminal period
    replaced by "?"), the hypothesis becomes the passage. Entailment and
    contradiction are Positive with answers "Yes" and "No"; neutral is
    Negative with no answer.
    """
    pairs: list[LabeledPair] = []
    questions: dict[str, Question] = {}
    passages: dict[str, Passage] = {}
    for i, (premise, hypothesis, label) in enumerate(records):
        if label not in _NLI_LABELS:
            raise DataError(f"record {i}: unknown NLI label {label!r}")
        stem = premise.strip()
        if stem.endswith("."):
            stem = stem[:-1]
        question_text = f"Czy {stem}?"
        qid = f"nli-q-{i:06d}"
        pid = f"nli-p-{i:06d}"
        if label == "neutral":
            relevance, answer = Relevance.NEGATIVE, None
        else:
            relevance = Relevance.POSITIVE
            answer = "Yes" if label == "entailment" else "No"
        pairs.append(LabeledPair(qid, pid, relevance, answer=answer))
        questions[qid] = Question(qid, question_text)
        passages[pid] = Passage(pid, hypothesis)
    return PairDataset(pairs=pairs, questions=questions, passages=passages)


# ---------------------------------------------------------------------------
# training-file export


def export_training(dataset: PairDataset, path: str | Path, format: str = "dpr_jsonl") -> int:
    """Write one trainer-ready record per question with >= 1 positive.

    Questions with only negatives are dropped. Returns the number of
    records written.
    """
    if format != "dpr_jsonl":
        raise DataError(f"unknown training export format {format!r}")
    grouped: dict[str, dict[str, list[LabeledPair]]] = {}
    for pair in dataset.pairs:
        bucket = grouped.setdefault(pair.question_id, {"positives": [], "negatives": []})
        key = "positives" if pair.relevance is Relevance.POSITIVE else "negatives"
        bucket[key].append(pair)

    def passage_record(pid: str) -> dict:
        passage = dataset.passages.get(pid)
        if passage is None:
            raise DataError(f"no text available for passage {pid!r}")
        return {"passage_id": pid, "title": passage.title, "text": passage.text}

    written = 0
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(grouped):
            bucket = grouped[qid]
            if not bucket["positives"]:
                continue
            record = {
                "question": dataset.question_text(qid),
                "positives": [
                    passage_record(p.passage_id)
                    for p in sorted(bucket["positives"], key=lambda x: x.passage_id)
                ],
                "negatives": [
                    passage_record(p.passage_id)
                    for p in sorted(bucket["negatives"], key=lambda x: x.passage_id)
                ],
            }
            fh.write(json.dumps(record, ensure_ascii=False))
            fh.write("\n")
            written += 1
    return written
