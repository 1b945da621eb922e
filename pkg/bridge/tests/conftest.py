import pytest
from fastapi.testclient import TestClient

from encbridge.config import BridgeConfig
from encbridge.service import create_app

# the builtin featurizer keeps tests hermetic: no downloads, fully
# deterministic vectors and scores
HASH_CONFIG = BridgeConfig(
    embed_model_id="hash:256",
    score_model_id="hash:256",
    max_batch=32,
)


@pytest.fixture
def client() -> TestClient:
    return TestClient(create_app(HASH_CONFIG))
