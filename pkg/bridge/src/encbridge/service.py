"""The HTTP service: POST /embed and POST /score.

Inference is request-serialized behind a lock with a bounded admission
queue; when the queue is full the service answers 429 and clients are
expected to back off. Model construction is lazy, so a broken model id
surfaces as 503 on first use rather than at process start.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .config import BridgeConfig
from .models import ModelLoadError, make_embedder, make_scorer


class EmbedRequest(BaseModel):
    texts: list[str]


class ScoreRequest(BaseModel):
    pairs: list[tuple[str, str]]


class _Gate:
    """Bounded admission plus serialized model access."""

    def __init__(self, queue_limit: int):
        self._slots = threading.BoundedSemaphore(queue_limit)
        self._model_lock = threading.Lock()

    def __enter__(self):
        if not self._slots.acquire(blocking=False):
            raise HTTPException(status_code=429, detail="server busy, retry later")
        self._model_lock.acquire()
        return self

    def __exit__(self, *exc_info):
        self._model_lock.release()
        self._slots.release()
        return False


class _LazyModel:
    def __init__(self, factory):
        self._factory = factory
        self._model = None
        self._error: str | None = None
        self._lock = threading.Lock()

    def get(self):
        with self._lock:
            if self._error is not None:
                raise HTTPException(status_code=503, detail=self._error)
            if self._model is None:
                try:
                    self._model = self._factory()
                except ModelLoadError as exc:
                    self._error = str(exc)
                    raise HTTPException(status_code=503, detail=self._error) from exc
            return self._model


def create_app(config: BridgeConfig) -> FastAPI:
    app = FastAPI(title="encbridge")
    gate = _Gate(config.queue_limit)
    embedder = _LazyModel(lambda: make_embedder(config.embed_model_id, config.device))
    scorer = _LazyModel(lambda: make_scorer(config.score_model_id, config.device))

    def check_batch(n: int) -> None:
        if n == 0:
            raise HTTPException(status_code=400, detail="empty batch")
        if n > config.max_batch:
            raise HTTPException(
                status_code=400, detail=f"batch of {n} exceeds max_batch={config.max_batch}"
            )

    @app.post("/embed")
    def embed(request: EmbedRequest):
        check_batch(len(request.texts))
        with gate:
            vectors = embedder.get().encode(request.texts)
        return {"vectors": vectors.tolist(), "dim": int(vectors.shape[1])}

    @app.post("/score")
    def score(request: ScoreRequest):
        check_batch(len(request.pairs))
        with gate:
            scores = scorer.get().score(list(request.pairs))
        if any(not 0.0 <= s <= 1.0 for s in scores):
            raise HTTPException(status_code=500, detail="scorer produced out-of-range value")
        return {"scores": scores}

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    return app
