"""Bulk corpus embedding: corpus JSONL in, binary vector file + id file
out. The output follows the retrieval engine's vector format exactly
(magic "PKVE", version, u32 dim, u64 count, float32 little-endian rows;
ids newline-delimited in a parallel file) so it loads there unchanged.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

VECTOR_MAGIC = b"PKVE"
VECTOR_FORMAT_VERSION = 1


def read_corpus(path: str | Path, use_title: bool = False) -> tuple[list[str], list[str]]:
    """Corpus JSONL ({"id", "title", "text"}) -> (ids, embeddable texts)."""
    ids: list[str] = []
    texts: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                pid = str(record["id"])
                text = str(record["text"])
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}: line {lineno}: malformed corpus record ({exc})") from None
            if pid in seen:
                raise ValueError(f"{path}: line {lineno}: duplicate passage id {pid!r}")
            seen.add(pid)
            title = record.get("title")
            ids.append(pid)
            texts.append(f"{title} {text}" if use_title and title else text)
    return ids, texts


def write_vectors(vectors: np.ndarray, ids: list[str], vector_path: str | Path, id_path: str | Path) -> None:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.ndim != 2 or vectors.shape[0] != len(ids):
        raise ValueError(f"{vectors.shape} vectors for {len(ids)} ids")
    with open(vector_path, "wb") as fh:
        fh.write(VECTOR_MAGIC)
        fh.write(struct.pack("<IIQ", VECTOR_FORMAT_VERSION, vectors.shape[1], vectors.shape[0]))
        fh.write(vectors.tobytes())
    with open(id_path, "w", encoding="utf-8") as fh:
        for pid in ids:
            fh.write(pid)
            fh.write("\n")


def dump_embeddings(
    corpus_path: str | Path,
    vector_path: str | Path,
    id_path: str | Path,
    embedder,
    batch_size: int = 64,
    use_title: bool = False,
) -> int:
    """Embed every corpus passage in batches; returns the row count.

    An empty corpus still produces a valid file: the header carries the
    model dimensionality and a zero count.
    """
    ids, texts = read_corpus(corpus_path, use_title=use_title)
    if not texts:
        write_vectors(np.zeros((0, embedder.dim), dtype=np.float32), [], vector_path, id_path)
        return 0
    blocks = [
        embedder.encode(texts[start : start + batch_size])
        for start in range(0, len(texts), batch_size)
    ]
    write_vectors(np.vstack(blocks), ids, vector_path, id_path)
    return len(ids)
