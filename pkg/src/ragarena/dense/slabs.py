"""Slab kinds: immutable index partitions plus the mutable Level-0 buffer."""
from pathlib import Path

import numpy as np

from ..errors import ParseError, ValidationError
from .hnsw import HNSWGraph
from .ivfpq import IVFPQ
from .rp import SignRandomProjection

_FORMAT = "ragarena-slab"
_VERSION = 1


class Slab:
    """Common shell: ids, vectors, and a kind-specific search structure."""

    kind = "abstract"

    def __init__(self, slab_id: int, level: int, ids: list[str], vectors: np.ndarray):
        self.slab_id = slab_id
        self.level = level
        self.ids = ids
        self.vectors = vectors

    def __len__(self) -> int:
        return len(self.ids)

    def search(self, q: np.ndarray, k: int) -> list[tuple[str, float]]:
        raise NotImplementedError

    def _resolve(self, hits: list[tuple[int, float]]) -> list[tuple[str, float]]:
        resolved = [(self.ids[row], sim) for row, sim in hits]
        resolved.sort(key=lambda item: (-item[1], item[0]))
        return resolved

    def _extra_arrays(self) -> dict[str, np.ndarray]:
        return {}

    def save(self, path: str | Path) -> None:
        np.savez(
            path,
            format=np.array(_FORMAT),
            version=np.array(_VERSION),
            kind=np.array(self.kind),
            level=np.array(self.level),
            slab_id=np.array(self.slab_id),
            ids=np.array(self.ids, dtype=str),
            vectors=self.vectors,
            **{f"x_{name}": arr for name, arr in self._extra_arrays().items()},
        )


class ExactSlab(Slab):
    """Brute-force scan; doubles as the mutable Level-0 write buffer."""

    kind = "Exact"

    def __init__(self, slab_id: int, level: int, ids: list[str] | None = None,
                 vectors: np.ndarray | None = None, dimension: int | None = None):
        if vectors is None:
            if dimension is None:
                raise ValidationError("ExactSlab needs vectors or a dimension")
            vectors = np.empty((0, dimension), dtype=np.float32)
        super().__init__(slab_id, level, list(ids or []), vectors)
        self._buffer = vectors
        self._count = len(self.ids)
        self._ids_arr: np.ndarray | None = None

    @property
    def view(self) -> np.ndarray:
        return self._buffer[: self._count]

    def append(self, chunk_id: str, vector: np.ndarray) -> None:
        if self._count == self._buffer.shape[0]:
            grown = np.empty((max(16, 2 * self._buffer.shape[0]), self._buffer.shape[1]), dtype=np.float32)
            grown[: self._count] = self._buffer[: self._count]
            self._buffer = grown
        self._buffer[self._count] = vector
        self.ids.append(chunk_id)
        self._count += 1
        self.vectors = self._buffer
        self._ids_arr = None

    def search(self, q: np.ndarray, k: int) -> list[tuple[str, float]]:
        count = self._count
        if count == 0:
            return []
        if self._ids_arr is None or len(self._ids_arr) != count:
            self._ids_arr = np.array(self.ids[:count], dtype=str)
        sims = self._buffer[:count] @ q
        order = np.lexsort((self._ids_arr, -sims))[:k]
        return [(str(self._ids_arr[i]), float(sims[i])) for i in order]

    def snapshot(self) -> tuple[list[str], np.ndarray]:
        count = self._count
        return self.ids[:count], self._buffer[:count].copy()

    def _extra_arrays(self) -> dict[str, np.ndarray]:
        return {}


class RandomProjectionSlab(Slab):
    kind = "RandomProjection"

    def __init__(self, slab_id, level, ids, vectors, planes: int = 64, radius: int = 2,
                 seed: int = 0, structure: SignRandomProjection | None = None):
        super().__init__(slab_id, level, ids, vectors)
        self.radius = radius
        self.structure = structure or SignRandomProjection(vectors, planes=planes, seed=seed)

    def search(self, q, k):
        return self._resolve(self.structure.search(q, k, radius=self.radius))

    def _extra_arrays(self):
        return {**self.structure.state_arrays(), "radius": np.array(self.radius)}


class HNSWSlab(Slab):
    kind = "HNSW"

    def __init__(self, slab_id, level, ids, vectors, m: int = 16, ef_construction: int = 200,
                 ef_search: int = 100, seed: int = 0, structure: HNSWGraph | None = None):
        super().__init__(slab_id, level, ids, vectors)
        self.ef_search = ef_search
        self.structure = structure or HNSWGraph.build(vectors, m=m, ef_construction=ef_construction, seed=seed)

    def search(self, q, k, ef_search: int | None = None):
        ef = self.ef_search if ef_search is None else ef_search
        return self._resolve(self.structure.search(q, k, ef_search=ef))

    def _extra_arrays(self):
        return {**self.structure.state_arrays(), "ef_search": np.array(self.ef_search)}


class IVFPQSlab(Slab):
    kind = "IVFPQ"

    def __init__(self, slab_id, level, ids, vectors, subquantizers: int = 8, bits: int = 8,
                 nprobe: int = 16, assignments: int = 4, rescore: int = 4000,
                 seed: int = 0, structure: IVFPQ | None = None):
        super().__init__(slab_id, level, ids, vectors)
        self.nprobe = nprobe
        self.rescore = rescore
        self.structure = structure or IVFPQ(vectors, subquantizers=subquantizers, bits=bits,
                                            assignments=assignments, seed=seed)

    def search(self, q, k, nprobe: int | None = None):
        probe = self.nprobe if nprobe is None else nprobe
        return self._resolve(self.structure.search(q, k, nprobe=probe, rescore=self.rescore))

    def _extra_arrays(self):
        return {**self.structure.state_arrays(), "nprobe": np.array(self.nprobe),
                "rescore": np.array(self.rescore)}


def load_slab(path: str | Path) -> Slab:
    with np.load(path, allow_pickle=False) as data:
        if str(data["format"]) != _FORMAT:
            raise ParseError(f"not a slab file: {path}")
        if int(data["version"]) != _VERSION:
            raise ParseError(f"unsupported slab version {int(data['version'])}")
        kind = str(data["kind"])
        slab_id = int(data["slab_id"])
        level = int(data["level"])
        ids = [str(x) for x in data["ids"]]
        vectors = data["vectors"]
        extra = {name[2:]: data[name] for name in data.files if name.startswith("x_")}
    if kind == ExactSlab.kind:
        return ExactSlab(slab_id, level, ids, vectors)
    if kind == RandomProjectionSlab.kind:
        structure = SignRandomProjection.from_state(vectors, extra)
        return RandomProjectionSlab(slab_id, level, ids, vectors,
                                    radius=int(extra["radius"]), structure=structure)
    if kind == HNSWSlab.kind:
        structure = HNSWGraph.from_state(vectors, extra)
        return HNSWSlab(slab_id, level, ids, vectors,
                        ef_search=int(extra["ef_search"]), structure=structure)
    if kind == IVFPQSlab.kind:
        structure = IVFPQ.from_state(vectors, extra)
        return IVFPQSlab(slab_id, level, ids, vectors, nprobe=int(extra["nprobe"]),
                         rescore=int(extra["rescore"]), structure=structure)
    raise ParseError(f"unknown slab kind {kind!r} in {path}")
