"""Embedding store and exact inner-product top-k search.

Vectors live in a flat little-endian binary file (magic "PKVE", version,
u32 dim, u64 count, then count*dim float32) with ids in a parallel
newline-delimited UTF-8 file. Search is exact brute force over the full
matrix; similarity is the raw inner product, so callers wanting cosine
normalize at load time.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .types import RunList

VECTOR_MAGIC = b"PKVE"
VECTOR_FORMAT_VERSION = 1


@dataclass
class EmbeddingMatrix:
    """Row-per-id float32 matrix with uniqueness and sanity checks."""

    ids: list[str]
    vectors: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2:
            raise DataError("vectors must be a 2-D matrix")
        if len(self.ids) != self.vectors.shape[0]:
            raise DataError(
                f"{len(self.ids)} ids for {self.vectors.shape[0]} vector rows"
            )
        if len(set(self.ids)) != len(self.ids):
            dupes = sorted({i for i in self.ids if self.ids.count(i) > 1})
            raise DataError(f"duplicate embedding ids: {dupes[:5]}")
        bad = ~np.isfinite(self.vectors)
        if bad.any():
            row = int(np.argwhere(bad)[0][0])
            raise DataError(f"non-finite value in vector row {row} (id {self.ids[row]!r})")
        if self.normalized:
            norms = np.linalg.norm(self.vectors, axis=1)
            off = np.abs(norms - 1.0) > 1e-4
            if off.any():
                row = int(np.argmax(off))
                raise DataError(
                    f"row {row} (id {self.ids[row]!r}) has norm {norms[row]:.6f}, "
                    "expected 1 within 1e-4"
                )

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.ids)

    def row(self, id_: str) -> np.ndarray:
        try:
            return self.vectors[self.ids.index(id_)]
        except ValueError:
            raise DataError(f"unknown embedding id {id_!r}") from None


def save_embeddings(matrix: EmbeddingMatrix, vector_path: str | Path, id_path: str | Path) -> None:
    vectors = np.ascontiguousarray(matrix.vectors, dtype="<f4")
    with open(vector_path, "wb") as fh:
        fh.write(VECTOR_MAGIC)
        fh.write(struct.pack("<IIQ", VECTOR_FORMAT_VERSION, matrix.dim, len(matrix)))
        fh.write(vectors.tobytes())
    with open(id_path, "w", encoding="utf-8") as fh:
        for id_ in matrix.ids:
            fh.write(id_)
            fh.write("\n")


def load_embeddings(
    vector_path: str | Path, id_path: str | Path, normalize: bool = False
) -> EmbeddingMatrix:
    """Read the binary vector file + parallel id file.

    ``normalize`` L2-normalizes rows at load time (for cosine-style use);
    zero rows cannot be normalized and are reported as errors.
    """
    with open(vector_path, "rb") as fh:
        magic = fh.read(4)
        if magic != VECTOR_MAGIC:
            raise DataError(f"{vector_path}: bad magic {magic!r}")
        header = fh.read(16)
        if len(header) != 16:
            raise DataError(f"{vector_path}: truncated header")
        version, dim, count = struct.unpack("<IIQ", header)
        if version != VECTOR_FORMAT_VERSION:
            raise DataError(f"{vector_path}: unsupported version {version}")
        payload = fh.read()
    expected = 4 * dim * count
    if len(payload) != expected:
        raise DataError(
            f"{vector_path}: payload holds {len(payload)} bytes, "
            f"header claims {expected} ({count} x {dim} float32)"
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(count, dim).astype(np.float32)

    with open(id_path, encoding="utf-8") as fh:
        ids = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
    if len(ids) != count:
        raise DataError(f"{id_path}: {len(ids)} ids for {count} vectors")

    normalized = False
    if normalize:
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        if (norms == 0).any():
            row = int(np.argmax(norms[:, 0] == 0))
            raise DataError(f"cannot normalize zero vector at row {row} (id {ids[row]!r})")
        vectors = vectors / norms
        normalized = True
    return EmbeddingMatrix(ids=ids, vectors=vectors, normalized=normalized)


def _top_k_with_ties(ids: list[str], scores: np.ndarray, k: int) -> list[tuple[str, float]]:
    """Exact top-k by (score desc, id asc), safe under score ties."""
    n = scores.shape[0]
    k = min(k, n)
    if k == 0:
        return []
    if n > 4 * k:
        # Narrow to the top-k score region first, then widen to every row
        # tied with the k-th score so the id tie-break stays exact.
        candidate = np.argpartition(-scores, k - 1)[:k]
        threshold = scores[candidate].min()
        pool = np.flatnonzero(scores >= threshold)
    else:
        pool = np.arange(n)
    ranked = sorted(((ids[i], float(scores[i])) for i in pool), key=lambda h: (-h[1], h[0]))
    return ranked[:k]


def dense_search(
    matrix: EmbeddingMatrix, query: np.ndarray, k: int, query_id: str = "query"
) -> RunList:
    """Exact inner-product top-k; non-positive scores are kept.

    Scores accumulate in float64 so ranking is stable well below any
    gap between distinct float32 inputs.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    query = np.asarray(query)
    if query.ndim != 1:
        raise DataError("query must be a 1-D vector")
    if query.shape[0] != matrix.dim:
        raise DataError(f"query dim {query.shape[0]} != index dim {matrix.dim}")
    scores = matrix.vectors.astype(np.float64) @ query.astype(np.float64)
    return RunList(query_id, tuple(_top_k_with_ties(matrix.ids, scores, k)))


def dense_search_batch(
    matrix: EmbeddingMatrix, queries: EmbeddingMatrix, k: int, threads: int = 1
) -> list[RunList]:
    """dense_search for every row of ``queries``, in query order.

    Each query goes through the exact single-query path (numpy matvec
    releases the GIL, so threads help), which keeps batch results
    bit-identical to dense_search regardless of ``threads``.
    """
    if queries.dim != matrix.dim:
        raise DataError(f"query dim {queries.dim} != index dim {matrix.dim}")
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")

    def one(i: int) -> RunList:
        return dense_search(matrix, queries.vectors[i], k, query_id=queries.ids[i])

    if threads > 1 and len(queries) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(len(queries))))
    return [one(i) for i in range(len(queries))]
