"""encbridge: a thin HTTP service exposing bi-encoder embeddings and
cross-encoder relevance scores, plus a bulk corpus embedding dump."""

from .config import BridgeConfig
from .dump import dump_embeddings, read_corpus, write_vectors
from .models import (
    HashEmbedder,
    HashScorer,
    ModelLoadError,
    make_embedder,
    make_scorer,
)
from .service import create_app

__version__ = "0.1.0"

__all__ = [
    "BridgeConfig",
    "HashEmbedder",
    "HashScorer",
    "ModelLoadError",
    "create_app",
    "dump_embeddings",
    "make_embedder",
    "make_scorer",
    "read_corpus",
    "write_vectors",
]
