import struct

import numpy as np
import pytest

from passagekit.dense import (
    EmbeddingMatrix,
    VECTOR_MAGIC,
    dense_search,
    dense_search_batch,
    load_embeddings,
    save_embeddings,
)
from passagekit.errors import DataError


def _matrix(rows, ids=None, normalized=False):
    vectors = np.asarray(rows, dtype=np.float32)
    ids = ids or [f"p{i:02d}" for i in range(vectors.shape[0])]
    return EmbeddingMatrix(ids=ids, vectors=vectors, normalized=normalized)


def _random_matrix(rng, n, dim, ids=None):
    return _matrix(rng.standard_normal((n, dim)).astype(np.float32), ids=ids)


def _full_sort_oracle(matrix, query, k):
    """Brute force over all rows: score everything, sort, truncate."""
    scores = [
        float(np.dot(matrix.vectors[i].astype(np.float64), np.asarray(query, np.float64)))
        for i in range(len(matrix))
    ]
    ranked = sorted(zip(matrix.ids, scores), key=lambda h: (-h[1], h[0]))
    return ranked[:k]


def _assert_hits_match(hits, oracle, tol=1e-12):
    assert [pid for pid, _ in hits] == [pid for pid, _ in oracle]
    for (_, got), (_, want) in zip(hits, oracle):
        assert got == pytest.approx(want, rel=tol, abs=tol)


class TestEmbeddingMatrix:
    def test_id_row_count_mismatch(self):
        with pytest.raises(DataError):
            EmbeddingMatrix(ids=["a"], vectors=np.zeros((2, 3), dtype=np.float32))

    def test_duplicate_ids_rejected(self):
        with pytest.raises(DataError, match="duplicate"):
            _matrix([[1.0, 0.0], [0.0, 1.0]], ids=["a", "a"])

    def test_nan_names_row(self):
        rows = np.array([[1.0, 0.0], [np.nan, 1.0]], dtype=np.float32)
        with pytest.raises(DataError, match="row 1"):
            _matrix(rows)

    def test_normalized_flag_checks_norms(self):
        with pytest.raises(DataError, match="norm"):
            _matrix([[2.0, 0.0]], normalized=True)
        _matrix([[1.0, 0.0]], normalized=True)  # unit row passes


class TestVectorFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(42)
        matrix = _random_matrix(rng, 5, 8)
        save_embeddings(matrix, tmp_path / "v.bin", tmp_path / "v.ids")
        loaded = load_embeddings(tmp_path / "v.bin", tmp_path / "v.ids")
        assert loaded.ids == matrix.ids
        np.testing.assert_array_equal(loaded.vectors, matrix.vectors)

    def test_two_vectors_dim_four(self, tmp_path):
        matrix = _matrix([[1, 2, 3, 4], [5, 6, 7, 8]], ids=["a", "b"])
        save_embeddings(matrix, tmp_path / "v.bin", tmp_path / "v.ids")
        loaded = load_embeddings(tmp_path / "v.bin", tmp_path / "v.ids")
        assert loaded.vectors.shape == (2, 4)

    def test_header_payload_mismatch(self, tmp_path):
        matrix = _matrix([[1.0, 2.0], [3.0, 4.0]])
        save_embeddings(matrix, tmp_path / "v.bin", tmp_path / "v.ids")
        raw = (tmp_path / "v.bin").read_bytes()
        (tmp_path / "v.bin").write_bytes(raw[:-4])  # drop one float
        with pytest.raises(DataError, match="payload"):
            load_embeddings(tmp_path / "v.bin", tmp_path / "v.ids")

    def test_bad_magic(self, tmp_path):
        (tmp_path / "v.bin").write_bytes(b"XXXX" + struct.pack("<IIQ", 1, 2, 0))
        (tmp_path / "v.ids").write_text("")
        with pytest.raises(DataError, match="magic"):
            load_embeddings(tmp_path / "v.bin", tmp_path / "v.ids")

    def test_nan_payload_names_row(self, tmp_path):
        vectors = np.array([[1.0, 0.0], [np.inf, 1.0]], dtype="<f4")
        with open(tmp_path / "v.bin", "wb") as fh:
            fh.write(VECTOR_MAGIC)
            fh.write(struct.pack("<IIQ", 1, 2, 2))
            fh.write(vectors.tobytes())
        (tmp_path / "v.ids").write_text("a\nb\n")
        with pytest.raises(DataError, match="row 1"):
            load_embeddings(tmp_path / "v.bin", tmp_path / "v.ids")

    def test_id_count_mismatch(self, tmp_path):
        matrix = _matrix([[1.0, 2.0]])
        save_embeddings(matrix, tmp_path / "v.bin", tmp_path / "v.ids")
        (tmp_path / "v.ids").write_text("a\nb\n")
        with pytest.raises(DataError, match="ids"):
            load_embeddings(tmp_path / "v.bin", tmp_path / "v.ids")

    def test_normalize_flag(self, tmp_path):
        matrix = _matrix([[3.0, 4.0], [0.0, 2.0]])
        save_embeddings(matrix, tmp_path / "v.bin", tmp_path / "v.ids")
        loaded = load_embeddings(tmp_path / "v.bin", tmp_path / "v.ids", normalize=True)
        assert loaded.normalized
        np.testing.assert_allclose(np.linalg.norm(loaded.vectors, axis=1), 1.0, atol=1e-6)

    def test_normalize_zero_vector_rejected(self, tmp_path):
        matrix = _matrix([[0.0, 0.0]])
        save_embeddings(matrix, tmp_path / "v.bin", tmp_path / "v.ids")
        with pytest.raises(DataError, match="zero vector"):
            load_embeddings(tmp_path / "v.bin", tmp_path / "v.ids", normalize=True)


class TestDenseSearch:
    def test_identity_query_ranks_first_with_unit_score(self):
        rng = np.random.default_rng(3)
        vectors = rng.standard_normal((6, 8)).astype(np.float32)
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        matrix = _matrix(vectors, normalized=True)
        run = dense_search(matrix, vectors[3], 3, query_id="q")
        assert run.hits[0][0] == "p03"
        assert run.hits[0][1] == pytest.approx(1.0, abs=1e-4)

    def test_orthogonal_query_all_zero_ties_by_id(self):
        matrix = _matrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]], ids=["pc", "pa", "pb"])
        query = np.zeros(3, dtype=np.float32)
        run = dense_search(matrix, query, 2)
        assert run.passage_ids() == ["pa", "pb"]
        assert all(score == 0.0 for _pid, score in run.hits)

    def test_non_positive_scores_retained(self):
        matrix = _matrix([[1.0, 0.0], [-1.0, 0.0]])
        run = dense_search(matrix, np.array([1.0, 0.0], dtype=np.float32), 2)
        assert run.hits == (("p00", 1.0), ("p01", -1.0))

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(99)
        for _ in range(40):
            n, dim = int(rng.integers(1, 30)), int(rng.integers(1, 12))
            matrix = _random_matrix(rng, n, dim)
            query = rng.standard_normal(dim).astype(np.float32)
            k = int(rng.integers(1, n + 3))
            run = dense_search(matrix, query, k)
            _assert_hits_match(run.hits, _full_sort_oracle(matrix, query, k))

    def test_scale_covariance(self):
        rng = np.random.default_rng(7)
        matrix = _random_matrix(rng, 10, 6)
        query = rng.standard_normal(6).astype(np.float32)
        base = dense_search(matrix, query, 10)
        scaled = dense_search(matrix, 2.0 * query, 10)
        assert scaled.passage_ids() == base.passage_ids()
        for (_, s2), (_, s1) in zip(scaled.hits, base.hits):
            assert s2 == pytest.approx(2.0 * s1, rel=1e-5)

    def test_concatenation_equals_merged_top_k(self):
        rng = np.random.default_rng(21)
        a = _random_matrix(rng, 12, 5, ids=[f"a{i:02d}" for i in range(12)])
        b = _random_matrix(rng, 9, 5, ids=[f"b{i:02d}" for i in range(9)])
        combined = _matrix(np.vstack([a.vectors, b.vectors]), ids=a.ids + b.ids)
        query = rng.standard_normal(5).astype(np.float32)
        k = 6
        merged = sorted(
            list(dense_search(a, query, k).hits) + list(dense_search(b, query, k).hits),
            key=lambda h: (-h[1], h[0]),
        )[:k]
        _assert_hits_match(dense_search(combined, query, k).hits, merged)

    def test_dimension_mismatch(self):
        matrix = _matrix([[1.0, 0.0]])
        with pytest.raises(DataError, match="dim"):
            dense_search(matrix, np.zeros(3, dtype=np.float32), 1)

    def test_k_below_one(self):
        matrix = _matrix([[1.0, 0.0]])
        with pytest.raises(DataError):
            dense_search(matrix, np.zeros(2, dtype=np.float32), 0)


class TestBatchSearch:
    def test_batch_equals_per_query_loop(self):
        rng = np.random.default_rng(13)
        matrix = _random_matrix(rng, 25, 7)
        queries = _random_matrix(rng, 6, 7, ids=[f"q{i}" for i in range(6)])
        batch = dense_search_batch(matrix, queries, 4)
        for i, run in enumerate(batch):
            single = dense_search(matrix, queries.vectors[i], 4, query_id=queries.ids[i])
            assert run == single

    def test_thread_count_does_not_change_results(self):
        rng = np.random.default_rng(17)
        matrix = _random_matrix(rng, 30, 6)
        queries = _random_matrix(rng, 8, 6, ids=[f"q{i}" for i in range(8)])
        assert dense_search_batch(matrix, queries, 5, threads=1) == dense_search_batch(
            matrix, queries, 5, threads=8
        )
