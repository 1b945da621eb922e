"""Encoder backends.

Model ids of the form "hash:<dim>" select a deterministic, dependency-
free feature-hashing encoder (useful for tests and offline smoke runs);
anything else is loaded through sentence-transformers. Embeddings are
always L2-normalized; pair scores always land in [0, 1].
"""

from __future__ import annotations

import hashlib
import math
import re

import numpy as np

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class ModelLoadError(Exception):
    """Backend could not be constructed (missing package, bad id)."""


def _hash64(data: str) -> int:
    return int.from_bytes(hashlib.blake2b(data.encode("utf-8"), digest_size=8).digest(), "little")


class HashEmbedder:
    """Feature-hashing text embedder: word tokens plus character
    trigrams, signed-hashed into a fixed-width vector, L2-normalized.
    Deterministic across processes and platforms."""

    def __init__(self, dim: int = 256):
        if dim < 8:
            raise ModelLoadError(f"hash embedder dim must be >= 8, got {dim}")
        self.dim = dim

    def _features(self, text: str):
        for token in _TOKEN_RE.findall(text.lower()):
            yield "w:" + token
            padded = f"^{token}$"
            for i in range(len(padded) - 2):
                yield "g:" + padded[i : i + 3]

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float32)
        for row, text in enumerate(texts):
            for feature in self._features(text):
                h = _hash64(feature)
                sign = 1.0 if (h >> 63) & 1 else -1.0
                out[row, h % self.dim] += sign
            norm = float(np.linalg.norm(out[row]))
            if norm == 0.0:
                out[row, 0] = 1.0  # empty text -> fixed unit vector
            else:
                out[row] /= norm
        return out


class HashScorer:
    """Pair scorer over hash embeddings: cosine mapped to [0, 1]."""

    def __init__(self, dim: int = 256):
        self._embedder = HashEmbedder(dim)

    def score(self, pairs: list[tuple[str, str]]) -> list[float]:
        questions = self._embedder.encode([q for q, _p in pairs])
        passages = self._embedder.encode([p for _q, p in pairs])
        cosines = np.sum(questions * passages, axis=1)
        return [min(1.0, max(0.0, (1.0 + float(c)) / 2.0)) for c in cosines]


class TransformerEmbedder:
    """sentence-transformers bi-encoder, normalized output."""

    def __init__(self, model_id: str, device: str = "cpu"):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelLoadError(f"sentence-transformers unavailable: {exc}") from exc
        try:
            self._model = SentenceTransformer(model_id, device=device)
        except Exception as exc:
            raise ModelLoadError(f"cannot load embed model {model_id!r}: {exc}") from exc
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> np.ndarray:
        vectors = self._model.encode(
            texts, convert_to_numpy=True, normalize_embeddings=True, show_progress_bar=False
        )
        return np.asarray(vectors, dtype=np.float32)


class TransformerScorer:
    """sentence-transformers cross-encoder; relevance logit through a
    sigmoid so downstream thresholds read as probabilities."""

    def __init__(self, model_id: str, device: str = "cpu"):
        try:
            from sentence_transformers import CrossEncoder
        except ImportError as exc:
            raise ModelLoadError(f"sentence-transformers unavailable: {exc}") from exc
        try:
            self._model = CrossEncoder(model_id, device=device)
        except Exception as exc:
            raise ModelLoadError(f"cannot load score model {model_id!r}: {exc}") from exc

    def score(self, pairs: list[tuple[str, str]]) -> list[float]:
        logits = self._model.predict([list(p) for p in pairs], show_progress_bar=False)
        scores = []
        for value in np.asarray(logits, dtype=np.float64).reshape(-1):
            scores.append(1.0 / (1.0 + math.exp(-float(value))))
        return scores


def _hash_dim(model_id: str) -> int:
    try:
        return int(model_id.split(":", 1)[1])
    except ValueError:
        raise ModelLoadError(f"bad hash model id {model_id!r}, expected hash:<dim>") from None


def make_embedder(model_id: str, device: str = "cpu"):
    if model_id.startswith("hash:"):
        return HashEmbedder(_hash_dim(model_id))
    return TransformerEmbedder(model_id, device=device)


def make_scorer(model_id: str, device: str = "cpu"):
    if model_id.startswith("hash:"):
        return HashScorer(_hash_dim(model_id))
    return TransformerScorer(model_id, device=device)
