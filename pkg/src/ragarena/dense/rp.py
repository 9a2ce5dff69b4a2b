"""Sign random projection hashing with multi-probe lookup."""
from itertools import combinations

import numpy as np


class SignRandomProjection:
    """Bucket vectors by the sign pattern of projections onto random hyperplanes.

    Queries probe every bucket within the configured Hamming radius of their
    own signature and rescore the gathered candidates exactly.
    """

    def __init__(self, vectors: np.ndarray, planes: int = 64, seed: int = 0):
        if planes > 64:
            raise ValueError("at most 64 hyperplanes fit the uint64 signature")
        self.vectors = vectors
        self.planes = np.random.default_rng(seed).normal(size=(planes, vectors.shape[1])).astype(np.float32)
        self.signatures = self._sign(vectors)
        self._index_buckets()

    def _index_buckets(self) -> None:
        self.buckets: dict[int, np.ndarray] = {}
        if self.signatures.size:
            order = np.argsort(self.signatures, kind="stable").astype(np.int32)
            boundaries = np.flatnonzero(np.diff(self.signatures[order])) + 1
            for group in np.split(order, boundaries):
                self.buckets[int(self.signatures[group[0]])] = group
        bits = [np.uint64(1) << np.uint64(i) for i in range(self.planes.shape[0])]
        # Probe masks for Hamming radius <= 2 over the signature bits.
        self._masks = [np.uint64(0)] + bits + [a | b for a, b in combinations(bits, 2)]

    def _sign(self, vectors: np.ndarray) -> np.ndarray:
        bits = (vectors @ self.planes.T) > 0
        weights = np.uint64(1) << np.arange(self.planes.shape[0], dtype=np.uint64)
        return (bits.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)

    def search(self, q: np.ndarray, k: int, radius: int = 2) -> list[tuple[int, float]]:
        """Top-k (row index, similarity) among vectors hashed within radius."""
        key = self._sign(q.reshape(1, -1))[0]
        if radius >= 2:
            masks = self._masks
        elif radius == 1:
            masks = self._masks[: 1 + self.planes.shape[0]]
        else:
            masks = self._masks[:1]
        found = [self.buckets[probe] for mask in masks
                 if (probe := int(key ^ mask)) in self.buckets]
        if not found:
            return []
        candidates = np.concatenate(found)
        sims = self.vectors[candidates] @ q
        order = np.argsort(-sims, kind="stable")[:k]
        return [(int(candidates[i]), float(sims[i])) for i in order]

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {"planes": self.planes, "signatures": self.signatures}

    @classmethod
    def from_state(cls, vectors: np.ndarray, state: dict[str, np.ndarray]) -> "SignRandomProjection":
        obj = cls.__new__(cls)
        obj.vectors = vectors
        obj.planes = state["planes"]
        obj.signatures = state["signatures"]
        obj._index_buckets()
        return obj
