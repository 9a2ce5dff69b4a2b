"""Inverted-file index with product quantization and exact rescoring."""
import math

import numpy as np

from ..errors import ValidationError


def kmeans(data: np.ndarray, k: int, rng: np.random.Generator, iters: int = 20,
           spherical: bool = False) -> np.ndarray:
    """Lloyd's algorithm with kmeans++ seeding; spherical renormalizes centroids.

    Returns (k_eff, d) centroids where k_eff = min(k, len(data)).
    """
    n = data.shape[0]
    k = min(k, n)
    centroids = data[_kmeanspp(data, k, rng)].copy()
    if spherical:
        _renormalize(centroids)
    for _ in range(iters):
        assign = _nearest(data, centroids, by_ip=spherical)
        moved = False
        for c in range(k):
            members = data[assign == c]
            if len(members) == 0:
                continue
            updated = members.mean(axis=0)
            if not np.array_equal(updated, centroids[c]):
                centroids[c] = updated
                moved = True
        if spherical:
            _renormalize(centroids)
        if not moved:
            break
    return centroids


def _kmeanspp(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = ((data - data[chosen[0]]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            chosen[i:] = rng.choice(n, size=k - i)
            break
        chosen[i] = rng.choice(n, p=d2 / total)
        np.minimum(d2, ((data - data[chosen[i]]) ** 2).sum(axis=1), out=d2)
    return chosen


def _renormalize(centroids: np.ndarray) -> None:
    norms = np.linalg.norm(centroids, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    centroids /= norms


def _nearest(data: np.ndarray, centroids: np.ndarray, by_ip: bool) -> np.ndarray:
    if by_ip:
        return np.argmax(data @ centroids.T, axis=1)
    d2 = (data**2).sum(axis=1, keepdims=True) - 2.0 * (data @ centroids.T) \
        + (centroids**2).sum(axis=1)
    return np.argmin(d2, axis=1)


class IVFPQ:
    """Coarse spherical-kmeans partition + PQ-coded residuals.

    Each vector is filed under its `assignments` nearest centroids, which keeps
    the probed lists covering true neighbors even on structureless data. Every
    filed entry encodes the residual against its own list's centroid. Original
    vectors are retained so the top approximate candidates can be rescored
    exactly; quantization then only has to get the shortlist right.
    """

    def __init__(
        self,
        vectors: np.ndarray,
        nlist: int | None = None,
        subquantizers: int = 8,
        bits: int = 8,
        assignments: int = 4,
        seed: int = 0,
    ):
        n, dim = vectors.shape
        if dim % subquantizers != 0:
            raise ValidationError(f"dimension {dim} not divisible by {subquantizers} subquantizers")
        self.vectors = vectors
        self.m = subquantizers
        self.ds = dim // subquantizers
        self.ncodes = 2**bits
        rng = np.random.default_rng(seed)

        self.nlist = min(nlist if nlist is not None else math.ceil(math.sqrt(n)), n)
        self.centroids = kmeans(vectors, self.nlist, rng, spherical=True)
        assignments = min(assignments, len(self.centroids))
        sims = vectors @ self.centroids.T
        filed = np.argsort(-sims, axis=1, kind="stable")[:, :assignments]

        # Codebooks are trained on primary residuals, then every filed entry is
        # encoded against the centroid of the list it actually sits in.
        primary_residuals = vectors - self.centroids[filed[:, 0]]
        self.codebooks = np.zeros((self.m, self.ncodes, self.ds), dtype=np.float32)
        for s in range(self.m):
            cb = kmeans(primary_residuals[:, s * self.ds:(s + 1) * self.ds], self.ncodes, rng)
            self.codebooks[s, : len(cb)] = cb

        rows = np.repeat(np.arange(n, dtype=np.int32), assignments)
        lists = filed.astype(np.int32).ravel()
        order = np.argsort(lists, kind="stable")
        self.entry_rows = rows[order]
        entry_lists = lists[order]
        residuals = vectors[self.entry_rows] - self.centroids[entry_lists]
        self.entry_codes = np.zeros((len(self.entry_rows), self.m), dtype=np.uint8)
        for s in range(self.m):
            sub = residuals[:, s * self.ds:(s + 1) * self.ds]
            self.entry_codes[:, s] = _nearest(sub, self.codebooks[s], by_ip=False).astype(np.uint8)
        self.list_offsets = np.searchsorted(entry_lists, np.arange(len(self.centroids) + 1))

    def search(self, q: np.ndarray, k: int, nprobe: int = 16, rescore: int = 4000) -> list[tuple[int, float]]:
        """Top-k (row index, similarity): probe nprobe lists by centroid
        similarity, rank entries by asymmetric PQ similarity, exactly rescore
        the best `rescore` of them."""
        centroid_sims = self.centroids @ q
        nprobe = min(nprobe, len(self.centroids))
        probed = np.argpartition(-centroid_sims, nprobe - 1)[:nprobe]

        # lut[s, code] = <q subvector, codebook entry>; approximate similarity
        # of an entry in list c is sim(q, centroid_c) + sum_s lut[s, code_s].
        lut = np.einsum("sd,scd->sc", q.reshape(self.m, self.ds), self.codebooks)
        rows = []
        approx = []
        for c in probed:
            lo, hi = self.list_offsets[c], self.list_offsets[c + 1]
            if lo == hi:
                continue
            codes = self.entry_codes[lo:hi]
            rows.append(self.entry_rows[lo:hi])
            approx.append(centroid_sims[c] + lut[np.arange(self.m), codes].sum(axis=1))
        if not rows:
            return []
        rows = np.concatenate(rows)
        approx = np.concatenate(approx)

        shortlist = min(rescore, rows.size)
        if shortlist < rows.size:
            top = np.argpartition(-approx, shortlist - 1)[:shortlist]
        else:
            top = np.arange(rows.size)
        candidates = np.unique(rows[top])
        exact = self.vectors[candidates] @ q
        order = np.argsort(-exact, kind="stable")[:k]
        return [(int(candidates[i]), float(exact[i])) for i in order]

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {
            "centroids": self.centroids,
            "entry_rows": self.entry_rows,
            "entry_codes": self.entry_codes,
            "list_offsets": self.list_offsets,
            "codebooks": self.codebooks,
            "meta": np.asarray([self.m, self.ds, self.ncodes], dtype=np.int64),
        }

    @classmethod
    def from_state(cls, vectors: np.ndarray, state: dict[str, np.ndarray]) -> "IVFPQ":
        obj = cls.__new__(cls)
        obj.vectors = vectors
        obj.m, obj.ds, obj.ncodes = (int(x) for x in state["meta"])
        obj.centroids = state["centroids"]
        obj.nlist = len(obj.centroids)
        obj.codebooks = state["codebooks"]
        obj.entry_rows = state["entry_rows"]
        obj.entry_codes = state["entry_codes"]
        obj.list_offsets = state["list_offsets"]
        return obj
