"""Service configuration."""

from __future__ import annotations

from dataclasses import dataclass

# Paper-era public checkpoints; any sentence-transformers bi-encoder /
# cross-encoder id works, as does the built-in "hash:<dim>" featurizer.
DEFAULT_EMBED_MODEL = "intfloat/multilingual-e5-base"
DEFAULT_SCORE_MODEL = "unicamp-dl/mMiniLM-L6-v2-mmarco-v2"


@dataclass(frozen=True)
class BridgeConfig:
    embed_model_id: str = DEFAULT_EMBED_MODEL
    score_model_id: str = DEFAULT_SCORE_MODEL
    port: int = 8900
    max_batch: int = 64
    device: str = "cpu"
    queue_limit: int = 8

    def __post_init__(self) -> None:
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")
        if self.queue_limit < 1:
            raise ValueError(f"queue_limit must be >= 1, got {self.queue_limit}")
