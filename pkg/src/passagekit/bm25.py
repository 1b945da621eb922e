"""Inverted index with BM25 scoring and exact top-k retrieval.

Scoring uses the non-negative IDF variant

    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
    score(q, d) = sum over q-token occurrences t present in d of
                  idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))

so scores are never negative and zero-score documents are never
retrieved. Retrieval is exact: candidates are accumulated document-at-a-
time over the union of query postings and selected with a bounded heap.

Both ``bm25_score`` and ``search`` add per-document contributions in
query-token order, so exhaustive scoring and retrieval agree bit-for-bit.
"""

from __future__ import annotations

import json
import math
import struct
from bisect import bisect_left
from heapq import nsmallest
from pathlib import Path

from .errors import DataError
from .text import Lexicon, analyze
from .types import Corpus, RunList

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75

_MANIFEST_NAME = "manifest.json"
_POSTINGS_MAGIC = b"PKPX"
_LENGTHS_MAGIC = b"PKDL"
_FORMAT_VERSION = 1


class InvertedIndex:
    """Immutable term -> (doc ordinal, tf) postings with BM25 parameters."""

    def __init__(
        self,
        postings: dict[str, tuple[list[int], list[int]]],
        doc_lengths: list[int],
        doc_ids: list[str],
        k1: float,
        b: float,
        analyzed: str,
        lemma_map: dict[str, str] | None = None,
    ):
        if len(doc_lengths) != len(doc_ids):
            raise DataError("doc_lengths and doc_ids disagree on document count")
        self.postings = postings
        self.doc_lengths = doc_lengths
        self.doc_ids = doc_ids
        self.N = len(doc_ids)
        self.avgdl = sum(doc_lengths) / self.N if self.N else 0.0
        self.k1 = k1
        self.b = b
        self.analyzed = analyzed
        self.lemma_map = dict(lemma_map or {})
        self._idf = {
            term: math.log(1.0 + (self.N - len(ordinals) + 0.5) / (len(ordinals) + 0.5))
            for term, (ordinals, _tfs) in postings.items()
        }
        # Per-document length normalizer, shared by both scoring paths so
        # they produce identical floats.
        self._norm = [
            self.k1 * (1.0 - self.b + self.b * dl / self.avgdl) if self.avgdl else 0.0
            for dl in doc_lengths
        ]

    def idf(self, term: str) -> float:
        return self._idf.get(term, 0.0)

    def df(self, term: str) -> int:
        entry = self.postings.get(term)
        return len(entry[0]) if entry else 0

    def term_frequency(self, term: str, ordinal: int) -> int:
        entry = self.postings.get(term)
        if entry is None:
            return 0
        ordinals, tfs = entry
        i = bisect_left(ordinals, ordinal)
        if i < len(ordinals) and ordinals[i] == ordinal:
            return tfs[i]
        return 0

    def _contribution(self, term: str, tf: int, ordinal: int) -> float:
        return self._idf[term] * tf * (self.k1 + 1.0) / (tf + self._norm[ordinal])

    def lexicon(self) -> Lexicon:
        """Lexicon matching the one the index was analyzed with."""
        return Lexicon(self.lemma_map)


def build_index(
    corpus: Corpus,
    lexicon: Lexicon | None = None,
    analyzed: str = "surface",
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> InvertedIndex:
    """Index a corpus under surface or lemma analysis."""
    if len(corpus) == 0:
        raise DataError("cannot index an empty corpus")
    if lexicon is None:
        lexicon = Lexicon.empty()
    postings: dict[str, tuple[list[int], list[int]]] = {}
    doc_lengths: list[int] = []
    doc_ids: list[str] = []
    for ordinal, passage in enumerate(corpus):
        tokens = analyze(corpus.indexed_text(passage), lexicon, mode=analyzed)
        doc_lengths.append(len(tokens))
        doc_ids.append(passage.id)
        counts: dict[str, int] = {}
        for token in tokens:
            counts[token] = counts.get(token, 0) + 1
        for term in sorted(counts):
            ordinals, tfs = postings.setdefault(term, ([], []))
            ordinals.append(ordinal)
            tfs.append(counts[term])
    return InvertedIndex(
        postings,
        doc_lengths,
        doc_ids,
        k1=k1,
        b=b,
        analyzed=analyzed,
        lemma_map=lexicon.lemma_map,
    )


def bm25_score(index: InvertedIndex, query_tokens: list[str], ordinal: int) -> float:
    """Score one document; duplicated query tokens count per occurrence."""
    if not 0 <= ordinal < index.N:
        raise DataError(f"document ordinal {ordinal} out of range [0, {index.N})")
    score = 0.0
    for token in query_tokens:
        tf = index.term_frequency(token, ordinal)
        if tf == 0:
            continue
        score += index._contribution(token, tf, ordinal)
    return score


def search(
    index: InvertedIndex, query_tokens: list[str], k: int, query_id: str = "query"
) -> RunList:
    """Exact top-k by BM25 score, ties broken by ascending passage id.

    Only documents containing at least one query term can score above
    zero, so the result may hold fewer than k hits.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    accumulator: dict[int, float] = {}
    for token in query_tokens:
        entry = index.postings.get(token)
        if entry is None:
            continue
        ordinals, tfs = entry
        for ordinal, tf in zip(ordinals, tfs):
            accumulator[ordinal] = accumulator.get(ordinal, 0.0) + index._contribution(
                token, tf, ordinal
            )
    scored = [
        (index.doc_ids[ordinal], score) for ordinal, score in accumulator.items() if score > 0.0
    ]
    top = nsmallest(k, scored, key=lambda hit: (-hit[1], hit[0]))
    return RunList(query_id, tuple(top))


# ---------------------------------------------------------------------------
# on-disk format (little-endian, versioned; see docs/formats.md)


def save_index(index: InvertedIndex, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format": "passagekit-index",
        "version": _FORMAT_VERSION,
        "k1": index.k1,
        "b": index.b,
        "analyzed": index.analyzed,
        "n_docs": index.N,
        "avgdl": index.avgdl,
        "n_terms": len(index.postings),
    }
    (directory / _MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    with open(directory / "postings.bin", "wb") as fh:
        fh.write(_POSTINGS_MAGIC)
        fh.write(struct.pack("<IQ", _FORMAT_VERSION, len(index.postings)))
        for term in sorted(index.postings):
            ordinals, tfs = index.postings[term]
            raw = term.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<Q", len(ordinals)))
            fh.write(struct.pack(f"<{2 * len(ordinals)}I", *(
                value for pair in zip(ordinals, tfs) for value in pair
            )))
    with open(directory / "doc_lengths.bin", "wb") as fh:
        fh.write(_LENGTHS_MAGIC)
        fh.write(struct.pack("<IQ", _FORMAT_VERSION, index.N))
        fh.write(struct.pack(f"<{index.N}I", *index.doc_lengths))
    with open(directory / "doc_ids.txt", "w", encoding="utf-8") as fh:
        for doc_id in index.doc_ids:
            fh.write(doc_id)
            fh.write("\n")
    with open(directory / "lexicon.tsv", "w", encoding="utf-8") as fh:
        for surface in sorted(index.lemma_map):
            fh.write(f"{surface}\t{index.lemma_map[surface]}\n")


def _read_exact(fh, n: int, path, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise DataError(f"{path}: truncated while reading {what}")
    return data


def load_index(directory: str | Path) -> InvertedIndex:
    directory = Path(directory)
    manifest_path = directory / _MANIFEST_NAME
    if not manifest_path.exists():
        raise DataError(f"{directory}: not an index directory (missing {_MANIFEST_NAME})")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("format") != "passagekit-index":
        raise DataError(f"{manifest_path}: unrecognized format field")
    if manifest.get("version") != _FORMAT_VERSION:
        raise DataError(f"{manifest_path}: unsupported version {manifest.get('version')}")

    postings_path = directory / "postings.bin"
    postings: dict[str, tuple[list[int], list[int]]] = {}
    with open(postings_path, "rb") as fh:
        if _read_exact(fh, 4, postings_path, "magic") != _POSTINGS_MAGIC:
            raise DataError(f"{postings_path}: bad magic")
        version, n_terms = struct.unpack("<IQ", _read_exact(fh, 12, postings_path, "header"))
        if version != _FORMAT_VERSION:
            raise DataError(f"{postings_path}: unsupported version {version}")
        for _ in range(n_terms):
            (term_len,) = struct.unpack("<I", _read_exact(fh, 4, postings_path, "term length"))
            term = _read_exact(fh, term_len, postings_path, "term").decode("utf-8")
            (n_postings,) = struct.unpack(
                "<Q", _read_exact(fh, 8, postings_path, "postings length")
            )
            flat = struct.unpack(
                f"<{2 * n_postings}I",
                _read_exact(fh, 8 * n_postings, postings_path, f"postings of {term!r}"),
            )
            postings[term] = (list(flat[0::2]), list(flat[1::2]))

    lengths_path = directory / "doc_lengths.bin"
    with open(lengths_path, "rb") as fh:
        if _read_exact(fh, 4, lengths_path, "magic") != _LENGTHS_MAGIC:
            raise DataError(f"{lengths_path}: bad magic")
        version, n_docs = struct.unpack("<IQ", _read_exact(fh, 12, lengths_path, "header"))
        if version != _FORMAT_VERSION:
            raise DataError(f"{lengths_path}: unsupported version {version}")
        doc_lengths = list(
            struct.unpack(f"<{n_docs}I", _read_exact(fh, 4 * n_docs, lengths_path, "lengths"))
        )

    doc_ids = (directory / "doc_ids.txt").read_text(encoding="utf-8").splitlines()
    if len(doc_ids) != n_docs:
        raise DataError(f"{directory}: doc_ids.txt holds {len(doc_ids)} ids, expected {n_docs}")

    lexicon_path = directory / "lexicon.tsv"
    lemma_map: dict[str, str] = {}
    if lexicon_path.exists():
        for line in lexicon_path.read_text(encoding="utf-8").splitlines():
            if line:
                surface, lemma = line.split("\t", 1)
                lemma_map[surface] = lemma

    index = InvertedIndex(
        postings,
        doc_lengths,
        doc_ids,
        k1=float(manifest["k1"]),
        b=float(manifest["b"]),
        analyzed=str(manifest["analyzed"]),
        lemma_map=lemma_map,
    )
    if abs(index.avgdl - float(manifest["avgdl"])) > 1e-9:
        raise DataError(f"{directory}: avgdl mismatch between manifest and doc lengths")
    return index
