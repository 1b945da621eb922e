"""Uniform (question, passage) relevance scoring in [0, 1].

Three backends hide behind one ScorerSpec:

  overlap_oracle  Jaccard similarity of lemma sets; deterministic and
                  dependency-free, used to exercise pipelines end to end.
  file_scores     replay of a previous scoring run, keyed by
                  (question_id, passage_id) in JSONL.
  remote          HTTP service: POST /score {"pairs": [["q","p"], ...]}
                  -> {"scores": [...]}, batched with retry.

Every backend's output is range-checked at this boundary.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from .errors import DataError, ExternalServiceError, UsageError
from .text import Lexicon, lemmatize, tokenize

DEFAULT_BATCH_SIZE = 32
REMOTE_RETRIES = 3
REMOTE_BACKOFF_SECONDS = 0.5
REMOTE_TIMEOUT_SECONDS = 60.0


@dataclass(frozen=True)
class ScorerSpec:
    """Which backend to use and the fields that backend needs."""

    kind: str
    endpoint: str | None = None
    score_file: str | None = None
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self) -> None:
        if self.kind not in ("overlap_oracle", "file_scores", "remote"):
            raise UsageError(f"unknown scorer kind {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise UsageError("remote scorer needs an endpoint URL")
        if self.kind == "file_scores" and not self.score_file:
            raise UsageError("file scorer needs a score file path")
        if self.kind == "remote" and self.score_file:
            raise UsageError("remote scorer takes no score file")
        if self.kind == "file_scores" and self.endpoint:
            raise UsageError("file scorer takes no endpoint")
        if self.kind == "overlap_oracle" and (self.endpoint or self.score_file):
            raise UsageError("overlap oracle takes neither endpoint nor score file")
        if self.batch_size < 1:
            raise UsageError(f"batch_size must be >= 1, got {self.batch_size}")


def parse_scorer_spec(text: str, batch_size: int = DEFAULT_BATCH_SIZE) -> ScorerSpec:
    """CLI syntax: "overlap", "file:scores.jsonl", or "remote:http://...". """
    if text in ("overlap", "overlap_oracle"):
        return ScorerSpec(kind="overlap_oracle", batch_size=batch_size)
    if text.startswith("file:"):
        return ScorerSpec(kind="file_scores", score_file=text[5:], batch_size=batch_size)
    if text.startswith("remote:"):
        return ScorerSpec(kind="remote", endpoint=text[7:], batch_size=batch_size)
    raise UsageError(
        f"cannot parse scorer spec {text!r} "
        "(expected 'overlap', 'file:PATH', or 'remote:URL')"
    )


def jaccard_overlap(question_text: str, passage_text: str, lexicon: Lexicon | None = None) -> float:
    """Jaccard similarity of the two texts' lemma sets."""
    if lexicon is None:
        lexicon = Lexicon.empty()
    q = set(lemmatize(tokenize(question_text), lexicon))
    p = set(lemmatize(tokenize(passage_text), lexicon))
    if not q and not p:
        return 1.0
    union = len(q | p)
    return len(q & p) / union if union else 0.0


def _load_score_file(path: str | Path) -> dict[tuple[str, str], float]:
    table: dict[tuple[str, str], float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                key = (str(rec["question_id"]), str(rec["passage_id"]))
                table[key] = float(rec["score"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                raise DataError(f"{path}: line {lineno}: malformed score record") from None
    return table


def _remote_score_batch(endpoint: str, batch: list[tuple[str, str]]) -> list[float]:
    url = endpoint.rstrip("/") + "/score"
    last_error: Exception | None = None
    for attempt in range(REMOTE_RETRIES):
        if attempt:
            time.sleep(REMOTE_BACKOFF_SECONDS * 2 ** (attempt - 1))
        try:
            response = requests.post(
                url,
                json={"pairs": [[q, p] for q, p in batch]},
                timeout=REMOTE_TIMEOUT_SECONDS,
            )
            response.raise_for_status()
            scores = response.json()["scores"]
            if not isinstance(scores, list) or len(scores) != len(batch):
                raise ExternalServiceError(
                    f"{url}: returned {len(scores) if isinstance(scores, list) else 'non-list'}"
                    f" scores for {len(batch)} pairs"
                )
            return [float(s) for s in scores]
        except ExternalServiceError:
            raise
        except (requests.RequestException, KeyError, TypeError, ValueError) as exc:
            last_error = exc
    raise ExternalServiceError(
        f"{url}: unreachable after {REMOTE_RETRIES} attempts ({last_error})"
    )


def score_pairs(
    spec: ScorerSpec,
    pairs: list[tuple[str, str]],
    pair_ids: list[tuple[str, str]] | None = None,
    lexicon: Lexicon | None = None,
) -> list[float]:
    """Score (question_text, passage_text) pairs, order-preserving.

    ``pair_ids`` supplies the (question_id, passage_id) keys that the
    file_scores backend replays; the other backends ignore it.
    """
    if not pairs:
        return []
    if spec.kind == "overlap_oracle":
        scores = [jaccard_overlap(q, p, lexicon) for q, p in pairs]
    elif spec.kind == "file_scores":
        if pair_ids is None or len(pair_ids) != len(pairs):
            raise DataError("file scorer needs (question_id, passage_id) keys for every pair")
        table = _load_score_file(spec.score_file)
        scores = []
        for key in pair_ids:
            if key not in table:
                raise DataError(f"score file {spec.score_file}: no score for pair {key}")
            scores.append(table[key])
    else:
        scores = []
        for start in range(0, len(pairs), spec.batch_size):
            scores.extend(_remote_score_batch(spec.endpoint, pairs[start : start + spec.batch_size]))
    for i, s in enumerate(scores):
        if not 0.0 <= s <= 1.0:
            raise DataError(f"scorer returned {s} for pair index {i}, outside [0, 1]")
    return scores
