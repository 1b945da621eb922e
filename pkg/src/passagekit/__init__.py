"""passagekit: passage retrieval (BM25 + dense), a training-data
refinery (matching, hard-negative mining, denoising, NLI conversion,
trainer export), and an Accuracy@k / NDCG@k evaluation harness."""

from .bm25 import InvertedIndex, bm25_score, build_index, load_index, save_index, search
from .dense import EmbeddingMatrix, dense_search, dense_search_batch, load_embeddings, save_embeddings
from .errors import DataError, ExternalServiceError, PassageKitError, UsageError
from .evaluation import EvalReport, accuracy_at_k, evaluate, ndcg_at_k
from .io import (
    load_corpus,
    load_pairs,
    load_qrels,
    load_questions,
    load_run,
    write_corpus,
    write_pairs,
    write_run,
)
from .pipelines import (
    DenoiseConfig,
    DenoiseReport,
    MatchConfig,
    MineConfig,
    convert_nli,
    denoise,
    export_training,
    match_questions,
    mine_hard_negatives,
)
from .scoring import ScorerSpec, jaccard_overlap, parse_scorer_spec, score_pairs
from .text import Lexicon, analyze, lemmatize, tokenize
from .types import (
    Corpus,
    DatasetStats,
    LabeledPair,
    PairDataset,
    Passage,
    Question,
    Relevance,
    RunList,
    dataset_stats,
)

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "DataError",
    "DatasetStats",
    "DenoiseConfig",
    "DenoiseReport",
    "EmbeddingMatrix",
    "EvalReport",
    "ExternalServiceError",
    "InvertedIndex",
    "LabeledPair",
    "Lexicon",
    "MatchConfig",
    "MineConfig",
    "PairDataset",
    "PassageKitError",
    "Passage",
    "Question",
    "Relevance",
    "RunList",
    "ScorerSpec",
    "UsageError",
    "accuracy_at_k",
    "analyze",
    "bm25_score",
    "build_index",
    "convert_nli",
    "dataset_stats",
    "denoise",
    "dense_search",
    "dense_search_batch",
    "evaluate",
    "export_training",
    "jaccard_overlap",
    "lemmatize",
    "load_corpus",
    "load_embeddings",
    "load_index",
    "load_pairs",
    "load_qrels",
    "load_questions",
    "load_run",
    "match_questions",
    "mine_hard_negatives",
    "ndcg_at_k",
    "parse_scorer_spec",
    "save_embeddings",
    "save_index",
    "score_pairs",
    "search",
    "tokenize",
    "write_corpus",
    "write_pairs",
    "write_run",
]
