"""Hierarchical navigable small-world graph for approximate nearest neighbors.

Distances are negated inner products over unit vectors, so smaller is closer.
Layer 0 adjacency lives in one fixed-width int32 matrix and searches batch all
neighbor distance computations, which keeps construction tractable in numpy.
"""
import heapq
import math

import numpy as np


class _Scratch:
    """Stamp-based visited set; one per concurrent searcher."""

    __slots__ = ("visited", "stamp")

    def __init__(self, n: int):
        self.visited = np.zeros(n, dtype=np.int32)
        self.stamp = 0

    def grow(self, n: int) -> None:
        if n > self.visited.shape[0]:
            fresh = np.zeros(max(n, 2 * self.visited.shape[0]), dtype=np.int32)
            fresh[: self.visited.shape[0]] = self.visited
            self.visited = fresh


class HNSWGraph:
    """Graph over externally stored vectors, addressed by dense row index.

    m caps out-degree on layers >= 1; layer 0 allows 3*m edges, which buys the
    last few recall points at ef_search=100 without touching search cost much.
    """

    def __init__(
        self,
        vectors: np.ndarray,
        m: int = 16,
        ef_construction: int = 200,
        m0: int | None = None,
        seed: int = 0,
    ):
        self.vectors = vectors
        self.m = m
        self.m0 = 3 * m if m0 is None else m0
        self.efc = ef_construction
        # Level multiplier 1/ln(m) gives the flat hierarchy the degree m supports.
        self.ml = 1.0 / math.log(m)
        self.rng = np.random.default_rng(seed)
        cap = max(vectors.shape[0], 1)
        self.adj0 = np.full((cap, self.m0 + 1), -1, dtype=np.int32)
        self.cnt0 = np.zeros(cap, dtype=np.int32)
        self.upper: list[list[np.ndarray]] = []
        self.n = 0
        self.entry = -1
        self.max_level = -1
        self._build_scratch = _Scratch(cap)

    @classmethod
    def build(
        cls,
        vectors: np.ndarray,
        m: int = 16,
        ef_construction: int = 200,
        m0: int | None = None,
        seed: int = 0,
    ) -> "HNSWGraph":
        graph = cls(vectors, m=m, ef_construction=ef_construction, m0=m0, seed=seed)
        for _ in range(vectors.shape[0]):
            graph.add_next()
        return graph

    def add_next(self) -> None:
        """Insert the next unindexed row of the vector store into the graph."""
        nid = self.n
        level = int(-math.log(self.rng.random() + 1e-300) * self.ml)
        self.upper.append([np.empty(0, dtype=np.int32) for _ in range(level)])
        self.n += 1
        self._build_scratch.grow(self.n)
        if self.entry < 0:
            self.entry = nid
            self.max_level = level
            return
        q = self.vectors[nid]
        scratch = self._build_scratch
        eps = [self.entry]
        for layer in range(self.max_level, level, -1):
            eps = [self._search_layer(q, eps, layer, 1, scratch)[0][1]]
        for layer in range(min(level, self.max_level), -1, -1):
            result = self._search_layer(q, eps, layer, self.efc, scratch)
            cap = self.m0 if layer == 0 else self.m
            ids = [node for _, node in result]
            dists = [dist for dist, _ in result]
            chosen = self._select_neighbors(ids, dists, cap)
            if layer == 0:
                self.adj0[nid, : len(chosen)] = chosen
                self.cnt0[nid] = len(chosen)
            else:
                self.upper[nid][layer - 1] = np.asarray(chosen, dtype=np.int32)
            for neighbor in chosen:
                self._connect_back(neighbor, nid, layer, cap)
            # Descend through the whole frontier, not just the chosen subset;
            # richer entry points measurably improve the finished graph.
            eps = ids
        if level > self.max_level:
            self.entry = nid
            self.max_level = level

    def search(self, q: np.ndarray, k: int, ef_search: int = 100) -> list[tuple[int, float]]:
        """Return up to k (row index, similarity) pairs, most similar first."""
        if self.n == 0:
            return []
        scratch = _Scratch(self.n)
        eps = [self.entry]
        for layer in range(self.max_level, 0, -1):
            eps = [self._search_layer(q, eps, layer, 1, scratch)[0][1]]
        result = self._search_layer(q, eps, 0, max(ef_search, k), scratch)
        return [(node, -dist) for dist, node in result[:k]]

    def _neighbors(self, node: int, layer: int) -> np.ndarray:
        if layer == 0:
            return self.adj0[node, : self.cnt0[node]]
        return self.upper[node][layer - 1]

    def _search_layer(
        self, q: np.ndarray, eps: list[int], layer: int, ef: int, scratch: _Scratch
    ) -> list[tuple[float, int]]:
        scratch.stamp += 1
        stamp = scratch.stamp
        visited = scratch.visited
        vectors = self.vectors
        dists = -(vectors[eps] @ q)
        frontier: list[tuple[float, int]] = []
        best: list[tuple[float, int]] = []
        for dist, node in zip(dists.tolist(), eps):
            visited[node] = stamp
            heapq.heappush(frontier, (dist, node))
            heapq.heappush(best, (-dist, node))
        while frontier:
            dist, node = heapq.heappop(frontier)
            worst = -best[0][0]
            if dist > worst and len(best) >= ef:
                break
            nbrs = self._neighbors(node, layer)
            if len(nbrs) == 0:
                continue
            fresh = nbrs[visited[nbrs] != stamp]
            if fresh.size == 0:
                continue
            visited[fresh] = stamp
            nd = -(vectors[fresh] @ q)
            if len(best) >= ef:
                keep = nd < worst
                fresh, nd = fresh[keep], nd[keep]
            for nxt, dn in zip(fresh.tolist(), nd.tolist()):
                if len(best) < ef:
                    heapq.heappush(frontier, (dn, nxt))
                    heapq.heappush(best, (-dn, nxt))
                elif dn < -best[0][0]:
                    heapq.heappush(frontier, (dn, nxt))
                    heapq.heapreplace(best, (-dn, nxt))
        out = [(-neg, node) for neg, node in best]
        out.sort()
        return out

    def _select_neighbors(self, ids: list[int], dists: list[float], m: int) -> list[int]:
        """Diversity heuristic: keep a candidate only if it sits closer to the
        query than to every already-kept neighbor, then fill with the nearest
        of the discarded. ids/dists arrive sorted ascending by distance."""
        if len(ids) <= m:
            return list(ids)
        vecs = self.vectors[ids]
        pairwise = -(vecs @ vecs.T)
        selected = [0]
        min_to_selected = pairwise[:, 0].copy()
        discarded = []
        for i in range(1, len(ids)):
            if len(selected) >= m:
                break
            if dists[i] < min_to_selected[i]:
                selected.append(i)
                np.minimum(min_to_selected, pairwise[:, i], out=min_to_selected)
            else:
                discarded.append(i)
        for i in discarded:
            if len(selected) >= m:
                break
            selected.append(i)
        return [ids[i] for i in selected]

    def _connect_back(self, node: int, new_id: int, layer: int, cap: int) -> None:
        if layer == 0:
            count = self.cnt0[node]
            if count < self.m0:
                self.adj0[node, count] = new_id
                self.cnt0[node] = count + 1
                return
            links = np.append(self.adj0[node, :count], np.int32(new_id))
        else:
            links = np.append(self.upper[node][layer - 1], np.int32(new_id))
            if links.size <= cap:
                self.upper[node][layer - 1] = links
                return
        dists = -(self.vectors[links] @ self.vectors[node])
        order = np.argsort(dists, kind="stable")
        ids = [int(links[i]) for i in order]
        sorted_dists = [float(dists[i]) for i in order]
        pruned = self._select_neighbors(ids, sorted_dists, cap)
        if layer == 0:
            self.adj0[node, : len(pruned)] = pruned
            self.adj0[node, len(pruned):] = -1
            self.cnt0[node] = len(pruned)
        else:
            self.upper[node][layer - 1] = np.asarray(pruned, dtype=np.int32)

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Adjacency state in flat arrays, for persistence."""
        levels = np.asarray([len(u) for u in self.upper], dtype=np.int32)
        flat_upper = (
            np.concatenate([arr for u in self.upper for arr in u])
            if any(self.upper) and levels.max(initial=0) > 0
            else np.empty(0, dtype=np.int32)
        )
        layer_sizes = np.asarray(
            [arr.size for u in self.upper for arr in u], dtype=np.int32
        )
        return {
            "adj0": self.adj0[: self.n],
            "cnt0": self.cnt0[: self.n],
            "levels": levels,
            "upper_flat": flat_upper.astype(np.int32),
            "upper_sizes": layer_sizes,
            "meta": np.asarray([self.m, self.m0, self.efc, self.entry, self.max_level, self.n], dtype=np.int64),
        }

    @classmethod
    def from_state(cls, vectors: np.ndarray, state: dict[str, np.ndarray]) -> "HNSWGraph":
        m, m0, efc, entry, max_level, n = (int(x) for x in state["meta"])
        graph = cls(vectors, m=m, ef_construction=efc, m0=m0)
        graph.n = n
        graph.entry = entry
        graph.max_level = max_level
        graph.adj0 = np.full((max(n, 1), m0 + 1), -1, dtype=np.int32)
        graph.adj0[:n] = state["adj0"]
        graph.cnt0 = np.zeros(max(n, 1), dtype=np.int32)
        graph.cnt0[:n] = state["cnt0"]
        sizes = state["upper_sizes"].tolist()
        flat = state["upper_flat"]
        graph.upper = []
        pos = 0
        si = 0
        for levels in state["levels"].tolist():
            node_layers = []
            for _ in range(levels):
                size = sizes[si]
                si += 1
                node_layers.append(flat[pos: pos + size].astype(np.int32))
                pos += size
            graph.upper.append(node_layers)
        return graph
