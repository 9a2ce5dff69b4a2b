import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ragarena.corpus import Chunk
from ragarena.errors import NotFoundError, ParseError, ValidationError
from ragarena.sparse import (
    BM25Params,
    analyze,
    bm25_score,
    build_sparse,
    load_sparse,
    save_sparse,
    search_sparse,
)


def _chunk(cid: str, text: str) -> Chunk:
    return Chunk(chunk_id=cid, doc_id=cid.split("#")[0], text=text,
                 token_count=len(analyze(text)))


def test_analyze_lowercases_no_stemming():
    assert analyze("Running DOGS, quickly!") == ["running", "dogs", ",", "quickly", "!"]


def test_idf_golden_ln2():
    # two equal-length chunks, term in exactly one: idf = ln(1 + (2-1+0.5)/(1+0.5)) = ln 2,
    # and tf=1 with dl=avgdl collapses the tf factor to exactly 1
    index = build_sparse([
        _chunk("a#0", "apple banana cherry"),
        _chunk("b#0", "damson elder fig"),
    ])
    assert index.idf("apple") == pytest.approx(math.log(2.0), abs=1e-12)
    assert bm25_score(index, ["apple"], "a#0") == pytest.approx(math.log(2.0), abs=1e-9)
    results = search_sparse(index, "apple", 5)
    assert results == [("a#0", pytest.approx(math.log(2.0), abs=1e-9))]


def test_unseen_term_idf_uses_df_zero():
    index = build_sparse([_chunk("a#0", "x y"), _chunk("b#0", "x z")])
    n = index.N
    assert index.idf("nope") == pytest.approx(math.log(1.0 + (n + 0.5) / 0.5))


def test_score_paths_bit_identical():
    chunks = [
        _chunk("a#0", "the cat sat on the mat"),
        _chunk("a#1", "the dog sat"),
        _chunk("b#0", "cats and dogs and cats"),
        _chunk("c#0", "a completely different sentence entirely"),
    ]
    index = build_sparse(chunks)
    query = "the cat sat"
    ranked = search_sparse(index, query, 10)
    for cid, score in ranked:
        assert bm25_score(index, analyze(query), cid) == score  # exact float equality


def test_tie_break_ascending_chunk_id():
    index = build_sparse([
        _chunk("z#0", "apple pie"),
        _chunk("a#0", "apple tart"),
        _chunk("m#0", "apple cake"),
    ])
    ids = [cid for cid, _ in search_sparse(index, "apple", 3)]
    assert ids == ["a#0", "m#0", "z#0"]


def test_repeated_query_term_counts_twice():
    index = build_sparse([_chunk("a#0", "apple pie"), _chunk("b#0", "cherry pie")])
    once = bm25_score(index, ["apple"], "a#0")
    twice = bm25_score(index, ["apple", "apple"], "a#0")
    assert twice == pytest.approx(2 * once)


def test_brute_force_oracle():
    # rank by independently computed BM25 and compare with search_sparse
    texts = [
        "glacier ice moves slowly downhill",
        "bees make honey in the hive",
        "the glacier carved the valley over time",
        "honey bees visit many flowers",
        "steam engines burn coal for power",
        "coal and ice were both shipped by rail",
        "ice ice ice",
    ]
    chunks = [_chunk(f"c{i:02d}#0", t) for i, t in enumerate(texts)]
    index = build_sparse(chunks)
    for query in ("glacier ice", "honey bees", "coal power", "ice"):
        terms = analyze(query)
        expected = []
        for c in chunks:
            s = 0.0
            dl = index.doc_lengths[c.chunk_id]
            for t in terms:
                tf = analyze(c.text).count(t)
                if not tf:
                    continue
                idf = math.log(1.0 + (index.N - len(index.postings[t]) + 0.5)
                               / (len(index.postings[t]) + 0.5))
                norm = index.params.k1 * (1 - index.params.b
                                          + index.params.b * dl / index.avgdl)
                s += idf * tf * (index.params.k1 + 1.0) / (tf + norm)
            if s > 0:
                expected.append((c.chunk_id, s))
        expected.sort(key=lambda e: (-e[1], e[0]))
        got = search_sparse(index, query, len(chunks))
        assert [cid for cid, _ in got] == [cid for cid, _ in expected]
        for (gc, gs), (ec, es) in zip(got, expected):
            assert gs == pytest.approx(es, abs=1e-12)


def test_duplicate_chunk_rejected():
    c = _chunk("a#0", "text")
    with pytest.raises(ValidationError, match="duplicate"):
        build_sparse([c, c])


def test_unknown_chunk_in_bm25_score():
    index = build_sparse([_chunk("a#0", "text")])
    with pytest.raises(NotFoundError):
        bm25_score(index, ["text"], "missing#0")


def test_k_validated_and_empty_index():
    index = build_sparse([_chunk("a#0", "text")])
    with pytest.raises(ValidationError):
        search_sparse(index, "text", 0)
    assert search_sparse(build_sparse([]), "text", 5) == []


def test_save_load_round_trip(tmp_path):
    chunks = [_chunk(f"d{i}#0", f"word{i} shared token stream") for i in range(5)]
    index = build_sparse(chunks, BM25Params(k1=1.5, b=0.6))
    path = tmp_path / "sparse.json"
    save_sparse(index, path)
    loaded = load_sparse(path)
    assert loaded.params == index.params
    assert loaded.postings == index.postings
    assert loaded.doc_lengths == index.doc_lengths
    assert search_sparse(loaded, "shared word2", 5) == search_sparse(index, "shared word2", 5)


def test_load_rejects_foreign_file(tmp_path):
    path = tmp_path / "other.json"
    path.write_text('{"format": "something-else"}', encoding="utf-8")
    with pytest.raises(ParseError):
        load_sparse(path)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.text(alphabet="abcde ", min_size=1, max_size=30), min_size=1, max_size=12),
       st.text(alphabet="abcde ", min_size=1, max_size=10))
def test_scores_positive_and_sorted(texts, query):
    chunks = [_chunk(f"c{i:03d}#0", t) for i, t in enumerate(texts)
              if analyze(t)]
    if not chunks:
        return
    index = build_sparse(chunks)
    results = search_sparse(index, query, len(chunks))
    scores = [s for _, s in results]
    assert all(s > 0 for s in scores)
    assert scores == sorted(scores, reverse=True)
    keys = [(-s, cid) for cid, s in results]
    assert keys == sorted(keys)
