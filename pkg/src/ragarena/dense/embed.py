"""Embedding backends; every vector is unit-normalized so inner product = cosine."""
import hashlib
import time
from typing import Protocol, runtime_checkable

import numpy as np

from ..errors import TransportError, ValidationError


@runtime_checkable
class Embedder(Protocol):
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...


class HashEmbedder:
    """Deterministic mock: a keyed hash of the text seeds a Gaussian draw.

    Model-free stand-in for a real embedding service. Unrelated texts map to
    near-orthogonal directions, identical texts to identical vectors.
    """

    def __init__(self, dimension: int = 768):
        self.dimension = dimension

    def embed(self, text: str) -> np.ndarray:
        digest = hashlib.blake2b(text.encode("utf-8"), digest_size=16).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "big"))
        v = rng.normal(size=self.dimension)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            v[0] = 1.0
            norm = 1.0
        return (v / norm).astype(np.float32)


class HTTPEmbedder:
    """Client for an embedding endpoint: POST {"text": ...} -> {"embedding": [...]}."""

    def __init__(self, url: str, dimension: int = 768, attempts: int = 3, backoff: float = 0.5):
        self.url = url
        self.dimension = dimension
        self.attempts = attempts
        self.backoff = backoff

    def embed(self, text: str) -> np.ndarray:
        import httpx

        last_error = None
        for attempt in range(self.attempts):
            try:
                response = httpx.post(self.url, json={"text": text}, timeout=30.0)
                response.raise_for_status()
                v = np.asarray(response.json()["embedding"], dtype=np.float32)
                return v / np.linalg.norm(v)
            except Exception as exc:
                last_error = exc
                if attempt + 1 < self.attempts:
                    time.sleep(self.backoff * 2**attempt)
        raise TransportError(f"embedding request failed: {last_error}", attempts=self.attempts)


def embed(text: str, embedder: Embedder) -> np.ndarray:
    """Embed text and enforce the output contract (dimension, unit norm)."""
    v = embedder.embed(text)
    if v.shape != (embedder.dimension,):
        raise ValidationError(
            f"embedder returned shape {v.shape}, expected ({embedder.dimension},)"
        )
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-6:
        raise ValidationError(f"embedder output norm {norm} is not 1")
    return v
