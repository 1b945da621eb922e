"""Retrieval metrics: Accuracy@k and binary NDCG@k over runs and qrels.

Accuracy@k is 1 when at least one relevant passage appears in the top k.
NDCG@k uses binary gain with a log2(rank+1) discount; the ideal DCG
truncates at min(|relevant|, k), so a question with more relevant
passages than k can still reach 1.0. Questions without any relevant
passage are skipped, not averaged.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

from .errors import DataError
from .types import RunList

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuestionResult:
    question_id: str
    hit: bool
    ndcg: float


@dataclass
class EvalReport:
    """Dataset-level means plus the per-question breakdown."""

    k: int
    accuracy: float
    ndcg: float
    per_question: list[QuestionResult] = field(default_factory=list)
    n_evaluated: int = 0
    n_skipped: int = 0

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "accuracy": self.accuracy,
            "ndcg": self.ndcg,
            "n_evaluated": self.n_evaluated,
            "n_skipped": self.n_skipped,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def per_question_jsonl(self) -> str:
        lines = [
            json.dumps(
                {"question_id": r.question_id, "hit": r.hit, "ndcg": r.ndcg},
                ensure_ascii=False,
            )
            for r in self.per_question
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    def format_table(self, label: str = "run") -> str:
        """Aligned Acc/NDCG table, percentages with two decimals."""
        header = f"{'Dataset':<24} {'Acc@' + str(self.k):>8} {'NDCG@' + str(self.k):>8}"
        row = f"{label:<24} {100.0 * self.accuracy:>8.2f} {100.0 * self.ndcg:>8.2f}"
        footer = f"(questions evaluated: {self.n_evaluated}, skipped: {self.n_skipped})"
        return "\n".join([header, row, footer])


def accuracy_at_k(run: RunList, relevant: set[str], k: int) -> int:
    """1 iff any of the first min(k, |run|) hits is relevant."""
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if not relevant:
        raise DataError("relevant set must be non-empty")
    for pid, _score in run.hits[:k]:
        if pid in relevant:
            return 1
    return 0


def ndcg_at_k(run: RunList, relevant: set[str], k: int) -> float:
    """Binary NDCG@k: DCG over the run prefix / ideal DCG."""
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if not relevant:
        raise DataError("relevant set must be non-empty")
    dcg = 0.0
    for i, (pid, _score) in enumerate(run.hits[:k], start=1):
        if pid in relevant:
            dcg += 1.0 / math.log2(i + 1)
    idcg = sum(1.0 / math.log2(i + 1) for i in range(1, min(len(relevant), k) + 1))
    return dcg / idcg


def evaluate(runs: list[RunList], qrels: dict[str, set[str]], k: int = 10) -> EvalReport:
    """Mean Accuracy@k and NDCG@k over all qrels questions.

    Questions with empty relevant sets are skipped. Questions present in
    qrels but missing from the runs score (0, 0.0) and count as
    evaluated; runs for unknown questions are ignored.
    """
    by_question: dict[str, RunList] = {}
    for run in runs:
        if run.question_id in by_question:
            raise DataError(f"duplicate run for question {run.question_id!r}")
        by_question[run.question_id] = run
    extra = sorted(set(by_question) - set(qrels))
    if extra:
        logger.warning(
            "%d run question(s) absent from qrels, ignored (first: %s)", len(extra), extra[0]
        )

    results: list[QuestionResult] = []
    n_skipped = 0
    for qid in sorted(qrels):
        relevant = qrels[qid]
        if not relevant:
            n_skipped += 1
            continue
        run = by_question.get(qid)
        if run is None:
            results.append(QuestionResult(qid, hit=False, ndcg=0.0))
        else:
            results.append(
                QuestionResult(
                    qid,
                    hit=bool(accuracy_at_k(run, relevant, k)),
                    ndcg=ndcg_at_k(run, relevant, k),
                )
            )
    n = len(results)
    return EvalReport(
        k=k,
        accuracy=sum(r.hit for r in results) / n if n else 0.0,
        ndcg=sum(r.ndcg for r in results) / n if n else 0.0,
        per_question=results,
        n_evaluated=n,
        n_skipped=n_skipped,
    )
