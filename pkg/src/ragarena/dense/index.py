"""Dense index: Level-0 write buffer plus sealed slabs under LSM-style compaction."""
import json
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ParseError, ValidationError
from .slabs import ExactSlab, HNSWSlab, IVFPQSlab, RandomProjectionSlab, Slab, load_slab

_FORMAT = "ragarena-dense"
_VERSION = 1


@dataclass
class DensePolicy:
    """Size thresholds and per-kind parameters; tests lower these freely."""

    dimension: int = 768
    level0_capacity: int = 10_000
    level_growth_factor: int = 10
    rp_threshold: int = 100_000
    ivfpq_threshold: int = 1_000_000
    rp_planes: int = 64
    rp_radius: int = 2
    hnsw_m: int = 16
    hnsw_ef_construction: int = 200
    hnsw_ef_search: int = 100
    pq_subquantizers: int = 8
    pq_bits: int = 8
    ivf_nprobe: int = 16
    ivf_assignments: int = 4
    ivf_rescore: int = 4000
    seed: int = 0

    def __post_init__(self):
        if self.dimension < 1:
            raise ValidationError("dimension must be positive")
        if self.level0_capacity < 1:
            raise ValidationError("level0_capacity must be positive")
        if self.level_growth_factor < 2:
            raise ValidationError("level_growth_factor must be at least 2")
        if not 0 < self.rp_threshold <= self.ivfpq_threshold:
            raise ValidationError("need 0 < rp_threshold <= ivfpq_threshold")


class DenseIndex:
    """All writes land in Level-0; sealed slabs are immutable and disjoint.

    Searches snapshot the slab list at entry, so concurrent compaction swaps
    never produce a half-updated view. One lock serializes all mutation.
    """

    def __init__(self, policy: DensePolicy | None = None):
        self.policy = policy or DensePolicy()
        self.level0 = ExactSlab(0, 0, dimension=self.policy.dimension)
        self.slabs: list[Slab] = []
        self._known: set[str] = set()
        self._next_slab_id = 1
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._known)

    def insert(self, chunk_id: str, vector: np.ndarray) -> None:
        vector = np.asarray(vector, dtype=np.float32)
        if vector.shape != (self.policy.dimension,):
            raise ValidationError(
                f"vector shape {vector.shape} does not match dimension {self.policy.dimension}"
            )
        with self._lock:
            if chunk_id in self._known:
                raise ValidationError(f"duplicate chunk_id {chunk_id!r}")
            self.level0.append(chunk_id, vector)
            self._known.add(chunk_id)
            if len(self.level0) >= self.policy.level0_capacity:
                self._compact_locked()

    def compact(self) -> None:
        with self._lock:
            self._compact_locked()

    def _compact_locked(self) -> None:
        if len(self.level0):
            ids, vectors = self.level0.snapshot()
            sealed = self._build_slab(level=1, ids=ids, vectors=vectors)
            self.slabs = self.slabs + [sealed]
            self.level0 = ExactSlab(0, 0, dimension=self.policy.dimension)
        # Cascade: when a level fills up, merge it wholesale into the next.
        while True:
            by_level: dict[int, list[Slab]] = {}
            for slab in self.slabs:
                by_level.setdefault(slab.level, []).append(slab)
            due = [lvl for lvl, group in by_level.items()
                   if len(group) >= self.policy.level_growth_factor]
            if not due:
                break
            level = min(due)
            group = by_level[level]
            ids: list[str] = []
            parts = []
            for slab in group:
                ids.extend(slab.ids)
                parts.append(slab.vectors[: len(slab.ids)])
            merged = self._build_slab(level=level + 1, ids=ids, vectors=np.concatenate(parts))
            retired = {id(slab) for slab in group}
            self.slabs = [s for s in self.slabs if id(s) not in retired] + [merged]

    def _build_slab(self, level: int, ids: list[str], vectors: np.ndarray) -> Slab:
        policy = self.policy
        slab_id = self._next_slab_id
        self._next_slab_id += 1
        seed = policy.seed + slab_id
        n = len(ids)
        if n < policy.rp_threshold:
            return RandomProjectionSlab(slab_id, level, ids, vectors,
                                        planes=policy.rp_planes, radius=policy.rp_radius, seed=seed)
        if n < policy.ivfpq_threshold:
            return HNSWSlab(slab_id, level, ids, vectors, m=policy.hnsw_m,
                            ef_construction=policy.hnsw_ef_construction,
                            ef_search=policy.hnsw_ef_search, seed=seed)
        return IVFPQSlab(slab_id, level, ids, vectors, subquantizers=policy.pq_subquantizers,
                         bits=policy.pq_bits, nprobe=policy.ivf_nprobe,
                         assignments=policy.ivf_assignments, rescore=policy.ivf_rescore, seed=seed)

    def search(self, query: np.ndarray, k: int) -> list[tuple[str, float]]:
        """Merge per-slab top-k, globally sorted; ties by ascending chunk_id."""
        if k < 1:
            raise ValidationError(f"k must be >= 1, got {k}")
        query = np.asarray(query, dtype=np.float32)
        if query.shape != (self.policy.dimension,):
            raise ValidationError(
                f"query shape {query.shape} does not match dimension {self.policy.dimension}"
            )
        snapshot = [self.level0, *self.slabs]
        merged: list[tuple[str, float]] = []
        for slab in snapshot:
            merged.extend(slab.search(query, k))
        merged.sort(key=lambda item: (-item[1], item[0]))
        return merged[:k]

    def all_ids(self) -> set[str]:
        """Union of ids across every slab, recomputed from slab contents."""
        found: set[str] = set()
        for slab in [self.level0, *self.slabs]:
            found.update(slab.ids[: len(slab)])
        return found

    def slab_id_sets(self) -> list[set[str]]:
        return [set(slab.ids[: len(slab)]) for slab in [self.level0, *self.slabs]]

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        entries = []
        for slab in self.slabs:
            filename = f"slab-{slab.slab_id:06d}.npz"
            slab.save(directory / filename)
            entries.append({"file": filename, "level": slab.level, "kind": slab.kind})
        self.level0.save(directory / "level0.npz")
        manifest = {
            "format": _FORMAT,
            "version": _VERSION,
            "policy": asdict(self.policy),
            "next_slab_id": self._next_slab_id,
            "slabs": entries,
            "level0": "level0.npz",
        }
        (directory / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")

    @classmethod
    def load(cls, directory: str | Path) -> "DenseIndex":
        directory = Path(directory)
        manifest_path = directory / "manifest.json"
        if not manifest_path.exists():
            raise ParseError(f"no manifest.json in {directory}")
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        if manifest.get("format") != _FORMAT:
            raise ParseError(f"not a dense index directory: {directory}")
        if manifest.get("version") != _VERSION:
            raise ParseError(f"unsupported dense index version {manifest.get('version')}")
        index = cls(DensePolicy(**manifest["policy"]))
        index._next_slab_id = manifest["next_slab_id"]
        loaded = load_slab(directory / manifest["level0"])
        level0 = ExactSlab(loaded.slab_id, 0, ids=loaded.ids, vectors=loaded.vectors)
        index.level0 = level0
        for entry in manifest["slabs"]:
            index.slabs.append(load_slab(directory / entry["file"]))
        index._known = index.all_ids()
        return index
