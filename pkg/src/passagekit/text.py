"""Tokenization and dictionary-based lemmatization.

The lemma dictionary is a plain surface->lemma map (TSV on disk); lookup
falls back to the lower-cased surface form, so an empty lexicon degrades
to surface-form analysis. Polish morphological dictionaries drop in
unchanged.
"""

from __future__ import annotations

import re
from pathlib import Path

from .io import load_lemma_dict

# Unicode letters and digits, underscore excluded.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Split on non-alphanumerics, lower-case, drop empties.

    Diacritics are preserved ("Zażółć" -> "zażółć").
    """
    return _TOKEN_RE.findall(text.lower())


class Lexicon:
    """Token interning plus a total lemma lookup.

    Token ids are dense from 0 in first-seen order; they back the cached
    lemma streams stored on passages and inside the BM25 index.
    """

    def __init__(self, lemma_map: dict[str, str] | None = None):
        self._lemmas: dict[str, str] = dict(lemma_map or {})
        self._token_to_id: dict[str, int] = {}
        self._id_to_token: list[str] = []

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        return cls(load_lemma_dict(path))

    @classmethod
    def empty(cls) -> "Lexicon":
        return cls({})

    def __len__(self) -> int:
        return len(self._token_to_id)

    def __bool__(self) -> bool:
        # a lexicon with no interned tokens is still a usable lexicon
        return True

    @property
    def lemma_map(self) -> dict[str, str]:
        return dict(self._lemmas)

    def lemma_of(self, token: str) -> str:
        folded = token.lower()
        return self._lemmas.get(folded, folded)

    def token_id(self, token: str) -> int:
        """Intern a token, assigning the next dense id on first sight."""
        tid = self._token_to_id.get(token)
        if tid is None:
            tid = len(self._id_to_token)
            self._token_to_id[token] = tid
            self._id_to_token.append(token)
        return tid

    def token_of(self, token_id: int) -> str:
        return self._id_to_token[token_id]

    def encode(self, tokens: list[str]) -> tuple[int, ...]:
        return tuple(self.token_id(t) for t in tokens)


def lemmatize(tokens: list[str], lexicon: Lexicon) -> list[str]:
    """Per-token dictionary lookup; OOV tokens map to themselves
    (lower-cased). Output length always equals input length."""
    return [lexicon.lemma_of(t) for t in tokens]


def analyze(text: str, lexicon: Lexicon, mode: str = "surface") -> list[str]:
    """Tokenize and, in "lemma" mode, lemmatize."""
    tokens = tokenize(text)
    if mode == "lemma":
        return lemmatize(tokens, lexicon)
    if mode != "surface":
        raise ValueError(f"unknown analysis mode {mode!r}")
    return tokens
