"""File formats: JSONL pairs/corpus/runs, TREC qrels and run files.

All readers are strict — malformed lines fail with the line number — and
every writer round-trips through its reader.

Formats:
  pairs JSONL   {"question_id", "question", "passage_id", "passage_title",
                 "passage_text", "relevant", "answer", "score"}
  corpus JSONL  {"id", "title", "text"}
  run JSONL     {"question_id", "hits": [{"passage_id", "score"}, ...]}
  TREC qrels    "qid 0 pid rel"
  TREC run      "qid Q0 pid rank score tag"
  NLI JSONL     {"premise", "hypothesis", "label"}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DataError
from .types import Corpus, LabeledPair, PairDataset, Passage, Question, Relevance, RunList

TREC_RUN_TAG = "passagekit"

PAIR_FIELDS = (
    "question_id",
    "question",
    "passage_id",
    "passage_title",
    "passage_text",
    "relevant",
    "answer",
    "score",
)


def _jsonl_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (1-based line number, parsed object) for non-blank lines."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(record, dict):
                raise DataError(f"{path}: line {lineno}: expected a JSON object")
            yield lineno, record


def _require(record: dict, key: str, path, lineno: int):
    if key not in record or record[key] is None:
        raise DataError(f"{path}: line {lineno}: missing field {key!r}")
    return record[key]


def _write_lines(path: str | Path, lines: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


# ---------------------------------------------------------------------------
# labeled pairs


def load_pairs(path: str | Path, format: str = "jsonl") -> PairDataset:
    """Load a labeled-pair dataset.

    ``jsonl`` is the native format with full texts; ``trec_qrels`` carries
    ids and binary relevance only (rel > 0 is positive), so the returned
    side tables are empty.
    """
    if format == "jsonl":
        return _load_pairs_jsonl(path)
    if format == "trec_qrels":
        return _load_pairs_qrels(path)
    raise DataError(f"unknown pairs format {format!r}")


def _load_pairs_jsonl(path: str | Path) -> PairDataset:
    pairs: list[LabeledPair] = []
    questions: dict[str, Question] = {}
    passages: dict[str, Passage] = {}
    seen: set[tuple[str, str]] = set()
    for lineno, rec in _jsonl_records(path):
        qid = str(_require(rec, "question_id", path, lineno))
        pid = str(_require(rec, "passage_id", path, lineno))
        qtext = str(_require(rec, "question", path, lineno))
        ptext = str(_require(rec, "passage_text", path, lineno))
        relevant = _require(rec, "relevant", path, lineno)
        if not isinstance(relevant, bool):
            raise DataError(f"{path}: line {lineno}: 'relevant' must be true/false")
        title = rec.get("passage_title")
        answer = rec.get("answer")
        score = rec.get("score")
        if score is not None:
            score = float(score)
        key = (qid, pid)
        if key in seen:
            raise DataError(f"{path}: line {lineno}: duplicate pair {key}")
        seen.add(key)
        try:
            pairs.append(
                LabeledPair(qid, pid, Relevance.from_bool(relevant), answer=answer, score=score)
            )
            questions.setdefault(qid, Question(qid, qtext))
            passages.setdefault(pid, Passage(pid, ptext, title=title))
        except DataError as exc:
            raise DataError(f"{path}: line {lineno}: {exc}") from None
    return PairDataset(pairs=pairs, questions=questions, passages=passages)


def _load_pairs_qrels(path: str | Path) -> PairDataset:
    pairs: list[LabeledPair] = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 4:
                raise DataError(
                    f"{path}: line {lineno}: expected 'qid iter pid rel', got {len(fields)} fields"
                )
            qid, _iter, pid, rel = fields
            try:
                rel_value = int(rel)
            except ValueError:
                raise DataError(f"{path}: line {lineno}: relevance {rel!r} not an integer") from None
            key = (qid, pid)
            if key in seen:
                raise DataError(f"{path}: line {lineno}: duplicate pair {key}")
            seen.add(key)
            pairs.append(LabeledPair(qid, pid, Relevance.from_bool(rel_value > 0)))
    return PairDataset(pairs=pairs)


def write_pairs(dataset: PairDataset, path: str | Path, format: str = "jsonl") -> None:
    """Serialize a dataset; load_pairs(write_pairs(x)) == x for jsonl."""
    if format == "jsonl":
        lines = []
        for pair in dataset.pairs:
            q = dataset.questions.get(pair.question_id)
            p = dataset.passages.get(pair.passage_id)
            rec = {
                "question_id": pair.question_id,
                "question": q.text if q else "",
                "passage_id": pair.passage_id,
                "passage_title": p.title if p else None,
                "passage_text": p.text if p else "",
                "relevant": pair.relevance.to_bool(),
                "answer": pair.answer,
                "score": pair.score,
            }
            lines.append(json.dumps(rec, ensure_ascii=False))
        _write_lines(path, lines)
    elif format == "trec_qrels":
        _write_lines(
            path,
            (
                f"{pair.question_id} 0 {pair.passage_id} {1 if pair.relevance.to_bool() else 0}"
                for pair in dataset.pairs
            ),
        )
    else:
        raise DataError(f"unknown pairs format {format!r}")


# ---------------------------------------------------------------------------
# corpus


def load_corpus(path: str | Path, use_title: bool = False) -> Corpus:
    passages: list[Passage] = []
    for lineno, rec in _jsonl_records(path):
        pid = str(_require(rec, "id", path, lineno))
        text = str(_require(rec, "text", path, lineno))
        title = rec.get("title")
        try:
            passages.append(Passage(pid, text, title=title))
        except DataError as exc:
            raise DataError(f"{path}: line {lineno}: {exc}") from None
    try:
        return Corpus(passages, use_title=use_title)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    _write_lines(
        path,
        (
            json.dumps({"id": p.id, "title": p.title, "text": p.text}, ensure_ascii=False)
            for p in corpus
        ),
    )


# ---------------------------------------------------------------------------
# runs


def write_run(runs: list[RunList], path: str | Path, format: str = "jsonl") -> None:
    """Write ranked runs; TREC lines are 'qid Q0 pid rank score tag'."""
    if format == "jsonl":
        lines = []
        for run in runs:
            rec = {
                "question_id": run.question_id,
                "hits": [{"passage_id": pid, "score": score} for pid, score in run.hits],
            }
            lines.append(json.dumps(rec, ensure_ascii=False))
        _write_lines(path, lines)
    elif format == "trec_run":
        lines = []
        for run in runs:
            for rank, (pid, score) in enumerate(run.hits, start=1):
                lines.append(f"{run.question_id} Q0 {pid} {rank} {score!r} {TREC_RUN_TAG}")
        _write_lines(path, lines)
    else:
        raise DataError(f"unknown run format {format!r}")


def load_run(path: str | Path, format: str = "jsonl") -> list[RunList]:
    if format == "jsonl":
        runs = []
        for lineno, rec in _jsonl_records(path):
            qid = str(_require(rec, "question_id", path, lineno))
            raw_hits = rec.get("hits")
            if raw_hits is None:
                raise DataError(f"{path}: line {lineno}: missing field 'hits'")
            try:
                hits = tuple((str(h["passage_id"]), float(h["score"])) for h in raw_hits)
                runs.append(RunList(qid, hits))
            except (KeyError, TypeError):
                raise DataError(f"{path}: line {lineno}: malformed hits") from None
        return runs
    if format == "trec_run":
        by_question: dict[str, list[tuple[int, str, float]]] = {}
        order: list[str] = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                fields = line.split()
                if len(fields) != 6:
                    raise DataError(
                        f"{path}: line {lineno}: expected 'qid Q0 pid rank score tag'"
                    )
                qid, _q0, pid, rank, score, _tag = fields
                try:
                    parsed = (int(rank), pid, float(score))
                except ValueError:
                    raise DataError(f"{path}: line {lineno}: bad rank or score") from None
                if qid not in by_question:
                    by_question[qid] = []
                    order.append(qid)
                by_question[qid].append(parsed)
        runs = []
        for qid in order:
            entries = sorted(by_question[qid])
            runs.append(RunList(qid, tuple((pid, score) for _rank, pid, score in entries)))
        return runs
    raise DataError(f"unknown run format {format!r}")


# ---------------------------------------------------------------------------
# questions, qrels, misc inputs


def load_questions(path: str | Path) -> list[Question]:
    """Question JSONL: {"id": str, "text": str}."""
    questions = []
    seen: set[str] = set()
    for lineno, rec in _jsonl_records(path):
        qid = str(_require(rec, "id", path, lineno))
        text = str(_require(rec, "text", path, lineno))
        if qid in seen:
            raise DataError(f"{path}: line {lineno}: duplicate question id {qid!r}")
        seen.add(qid)
        questions.append(Question(qid, text))
    return questions


def load_qrels(path: str | Path, format: str | None = None) -> dict[str, set[str]]:
    """Relevance judgments as {question_id: set of relevant passage_ids}.

    Accepts TREC qrels or the native pairs JSONL (positive rows are the
    relevant set). Questions whose rows are all non-relevant stay in the
    mapping with an empty set. Format is sniffed from the extension when
    not given: .jsonl means pairs JSONL.
    """
    if format is None:
        format = "jsonl" if str(path).endswith(".jsonl") else "trec_qrels"
    dataset = load_pairs(path, format=format)
    qrels: dict[str, set[str]] = {}
    for pair in dataset.pairs:
        bucket = qrels.setdefault(pair.question_id, set())
        if pair.relevance is Relevance.POSITIVE:
            bucket.add(pair.passage_id)
    return qrels


def load_lemma_dict(path: str | Path) -> dict[str, str]:
    """Lemma dictionary TSV: 'surface<TAB>lemma', later lines override."""
    mapping: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise DataError(f"{path}: line {lineno}: expected 'surface<TAB>lemma'")
            mapping[parts[0].lower()] = parts[1]
    return mapping


def load_wordlist(path: str | Path) -> set[str]:
    """Newline-delimited UTF-8 blacklist; blank lines ignored."""
    with open(path, encoding="utf-8") as fh:
        return {line.strip() for line in fh if line.strip()}


def load_nli_records(path: str | Path) -> list[tuple[str, str, str]]:
    """NLI JSONL rows as (premise, hypothesis, label) triples."""
    records = []
    for lineno, rec in _jsonl_records(path):
        premise = str(_require(rec, "premise", path, lineno))
        hypothesis = str(_require(rec, "hypothesis", path, lineno))
        label = str(_require(rec, "label", path, lineno))
        records.append((premise, hypothesis, label))
    return records


def load_config(path: str | Path) -> dict:
    """Pipeline config file: one JSON object, optionally sectioned by
    pipeline name ({"denoise": {...}, "mine": {...}, "match": {...}})."""
    with open(path, encoding="utf-8") as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(config, dict):
        raise DataError(f"{path}: config must be a JSON object")
    return config
