from pathlib import Path

import pytest

from passagekit.types import Corpus, Passage

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def three_doc_corpus() -> Corpus:
    """The hand-computable corpus: avgdl 2.0, df(kot) = 2."""
    return Corpus(
        [
            Passage("d1", "kot pies"),
            Passage("d2", "kot kot ryba"),
            Passage("d3", "ryba"),
        ]
    )
