"""BM25 inverted index over chunks."""
import json
import math
from bisect import bisect_left
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from .corpus import Chunk, tokenize
from .errors import NotFoundError, ParseError, ValidationError

_FORMAT = "ragarena-sparse"
_VERSION = 1


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.2
    b: float = 0.75


def analyze(text: str) -> list[str]:
    """Query/document analysis chain: lowercase, tokenize. No stemming, no stopwords."""
    return tokenize(text.lower())


class SparseIndex:
    def __init__(
        self,
        postings: dict[str, list[tuple[str, int]]],
        doc_lengths: dict[str, int],
        params: BM25Params = BM25Params(),
    ):
        self.postings = postings
        self.doc_lengths = doc_lengths
        self.params = params
        self.N = len(doc_lengths)
        self.avgdl = sum(doc_lengths.values()) / self.N if self.N else 0.0

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log(1.0 + (self.N - df + 0.5) / (df + 0.5))

    def term_frequency(self, term: str, chunk_id: str) -> int:
        plist = self.postings.get(term, [])
        i = bisect_left(plist, chunk_id, key=lambda entry: entry[0])
        if i < len(plist) and plist[i][0] == chunk_id:
            return plist[i][1]
        return 0


def build_sparse(chunks: Sequence[Chunk], params: BM25Params = BM25Params()) -> SparseIndex:
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    for chunk in chunks:
        if chunk.chunk_id in doc_lengths:
            raise ValidationError(f"duplicate chunk_id {chunk.chunk_id!r}")
        terms = analyze(chunk.text)
        doc_lengths[chunk.chunk_id] = len(terms)
        for term, tf in Counter(terms).items():
            postings.setdefault(term, []).append((chunk.chunk_id, tf))
    for plist in postings.values():
        plist.sort()
    return SparseIndex(postings, doc_lengths, params)


def bm25_score(index: SparseIndex, query_terms: Sequence[str], chunk_id: str) -> float:
    """Sum the BM25 contribution of every query term occurrence, in query order.

    Accumulation order matches search_sparse so both paths produce identical floats.
    """
    if chunk_id not in index.doc_lengths:
        raise NotFoundError(f"unknown chunk_id {chunk_id!r}")
    k1, b = index.params.k1, index.params.b
    dl = index.doc_lengths[chunk_id]
    norm = k1 * (1.0 - b + b * dl / index.avgdl) if index.avgdl else k1
    score = 0.0
    for term in query_terms:
        tf = index.term_frequency(term, chunk_id)
        if tf:
            score += index.idf(term) * tf * (k1 + 1.0) / (tf + norm)
    return score


def search_sparse(index: SparseIndex, query: str, k: int) -> list[tuple[str, float]]:
    """Top-k chunks by BM25, descending; ties broken by ascending chunk_id."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if index.N == 0:
        return []
    k1, b = index.params.k1, index.params.b
    scores: dict[str, float] = {}
    for term in analyze(query):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for chunk_id, tf in plist:
            dl = index.doc_lengths[chunk_id]
            norm = k1 * (1.0 - b + b * dl / index.avgdl)
            scores[chunk_id] = scores.get(chunk_id, 0.0) + idf * tf * (k1 + 1.0) / (tf + norm)
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def save_sparse(index: SparseIndex, path: str | Path) -> None:
    payload = {
        "format": _FORMAT,
        "version": _VERSION,
        "params": {"k1": index.params.k1, "b": index.params.b},
        "doc_lengths": index.doc_lengths,
        "postings": {term: [[cid, tf] for cid, tf in plist] for term, plist in index.postings.items()},
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_sparse(path: str | Path) -> SparseIndex:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != _FORMAT:
        raise ParseError(f"not a sparse index file: {path}")
    if payload.get("version") != _VERSION:
        raise ParseError(f"unsupported sparse index version {payload.get('version')}")
    postings = {
        term: [(cid, int(tf)) for cid, tf in plist]
        for term, plist in payload["postings"].items()
    }
    params = BM25Params(**payload["params"])
    return SparseIndex(postings, payload["doc_lengths"], params)
