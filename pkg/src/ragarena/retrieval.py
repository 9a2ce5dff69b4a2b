"""Hybrid retrieval: reciprocal rank fusion over the sparse and dense indices."""
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

from .dense import DenseIndex, Embedder, embed
from .errors import ValidationError
from .sparse import SparseIndex, search_sparse


@dataclass(frozen=True)
class RetrievedPassage:
    chunk_id: str
    text: str
    fused_score: float
    sparse_rank: int | None = None
    dense_rank: int | None = None


RewriteHook = Callable[[str], str]
RerankHook = Callable[[str, list[RetrievedPassage]], list[RetrievedPassage]]


@dataclass
class RetrievalConfig:
    k_each: int = 50
    k_final: int = 10
    k_rrf: int = 60
    rewrite: RewriteHook | None = None
    rerank: RerankHook | None = None


def rrf_fuse(
    sparse_ids: Sequence[str],
    dense_ids: Sequence[str],
    k_rrf: int = 60,
    k: int = 10,
    texts: Mapping[str, str] | None = None,
) -> list[RetrievedPassage]:
    """Fuse two ranked id lists: score(id) = sum over lists of 1/(k_rrf + rank).

    Ranks are 1-based. Ties broken by ascending chunk_id.
    """
    if k < 1 or k_rrf < 1:
        raise ValidationError("k and k_rrf must be >= 1")
    scores: dict[str, float] = {}
    sparse_rank: dict[str, int] = {}
    dense_rank: dict[str, int] = {}
    for rank, chunk_id in enumerate(sparse_ids, start=1):
        scores[chunk_id] = scores.get(chunk_id, 0.0) + 1.0 / (k_rrf + rank)
        sparse_rank[chunk_id] = rank
    for rank, chunk_id in enumerate(dense_ids, start=1):
        scores[chunk_id] = scores.get(chunk_id, 0.0) + 1.0 / (k_rrf + rank)
        dense_rank[chunk_id] = rank
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:k]
    return [
        RetrievedPassage(
            chunk_id=chunk_id,
            text=texts.get(chunk_id, "") if texts else "",
            fused_score=score,
            sparse_rank=sparse_rank.get(chunk_id),
            dense_rank=dense_rank.get(chunk_id),
        )
        for chunk_id, score in ranked
    ]


def retrieve(
    question: str,
    sparse_index: SparseIndex,
    dense_index: DenseIndex,
    embedder: Embedder,
    texts: Mapping[str, str],
    config: RetrievalConfig | None = None,
) -> list[RetrievedPassage]:
    """Search both indices, fuse, and hand the fused top-k to the rerank hook."""
    config = config or RetrievalConfig()
    query = config.rewrite(question) if config.rewrite else question
    sparse_hits = search_sparse(sparse_index, query, config.k_each)
    dense_hits = dense_index.search(embed(query, embedder), config.k_each)
    fused = rrf_fuse(
        [cid for cid, _ in sparse_hits],
        [cid for cid, _ in dense_hits],
        k_rrf=config.k_rrf,
        k=config.k_final,
        texts=texts,
    )
    if config.rerank:
        fused = config.rerank(question, fused)
    return fused
