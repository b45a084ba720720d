"""Retrieval baseline: copy gold implications from the most similar
training headline under a sentence embedder."""
from __future__ import annotations

import hashlib
from typing import Optional, Protocol, Sequence

import numpy as np

from ..schema import ReactionFrame, Record


class SentenceEmbedder(Protocol):
    def embed(self, text: str) -> np.ndarray: ...


class HashedNgramEmbedder:
    """Deterministic character-trigram hashing embedder.

    Needs no learned weights, so the retrieval baseline runs offline;
    swap in a pretrained sentence encoder through the same interface for
    stronger neighbors.
    """

    def __init__(self, dim: int = 256):
        self.dim = dim

    def _bucket(self, gram: str) -> int:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % self.dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=float)
        padded = f"  {text.lower().strip()}  "
        for i in range(len(padded) - 2):
            vec[self._bucket(padded[i : i + 3])] += 1.0
        return vec

    def embed_token(self, token: str) -> np.ndarray:
        return self.embed(token)


class NearestNeighborIndex:
    """Immutable cosine index over training headlines."""

    def __init__(self, records: Sequence[Record], embedder: SentenceEmbedder):
        if not records:
            raise ValueError("empty training corpus")
        self.records = sorted(records, key=lambda r: r.headline.id)
        matrix = np.stack([embedder.embed(r.headline.text) for r in self.records])
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        self._unit = matrix / norms
        self._embedder = embedder

    def query(self, headline_text: str) -> Record:
        vec = self._embedder.embed(headline_text)
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec = vec / norm
        scores = self._unit @ vec
        # records are id-sorted, so the first argmax is the lowest-id tie
        return self.records[int(np.argmax(scores))]


def nn_baseline(
    index: NearestNeighborIndex, query_headline: str
) -> Optional[ReactionFrame]:
    """Gold implications of the nearest training headline by cosine."""
    return index.query(query_headline).frame
