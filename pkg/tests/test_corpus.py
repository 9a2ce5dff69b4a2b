import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ragarena.corpus import (
    Chunk,
    Document,
    chunk_corpus,
    chunk_document,
    doc_id_of,
    load_corpus,
    read_chunks,
    sentence_breaks,
    token_spans,
    tokenize,
    write_chunks,
)
from ragarena.errors import ParseError, ValidationError

from helpers import assert_chunk_invariants as _assert_chunk_invariants
from helpers import synthetic_documents, write_corpus_file


def test_tokenize_words_and_punctuation():
    assert tokenize("Hello, world!") == ["Hello", ",", "world", "!"]
    assert tokenize("a-b c_d 3.14") == ["a", "-", "b", "c_d", "3", ".", "14"]
    assert tokenize("   ") == []


def test_token_spans_cover_tokens():
    text = "One two, three."
    spans = token_spans(text)
    assert [text[a:b] for a, b in spans] == tokenize(text)


def test_sentence_breaks_basic():
    text = "First one. Second two! Third three?"
    breaks = sentence_breaks(text)
    assert breaks == [10, 22, 35]


def test_sentence_breaks_abbreviation_not_a_break():
    text = "Dr. Smith arrived. He left."
    breaks = sentence_breaks(text)
    # the period after "Dr" does not end a sentence
    assert breaks == [18, 27]


def test_sentence_breaks_blank_line():
    text = "no trailing punctuation\n\nsecond paragraph"
    breaks = sentence_breaks(text)
    assert breaks[0] == text.index("\n") + 1
    assert breaks[-1] == len(text)


def test_sentence_breaks_decimal_number_kept_whole():
    text = "Pi is 3.14 roughly. Next."
    assert sentence_breaks(text) == [19, 25]


def test_chunk_ids_and_doc_id_of():
    doc = Document(doc_id="d1", text="One. Two. Three.")
    chunks = chunk_document(doc, max_tokens=4)
    assert [c.chunk_id for c in chunks] == ["d1#0", "d1#1"]
    for c in chunks:
        assert doc_id_of(c.chunk_id) == "d1"
    assert doc_id_of("weird#id#7") == "weird#id"


def test_empty_document_yields_no_chunks():
    assert chunk_document(Document(doc_id="d", text="")) == []
    assert chunk_document(Document(doc_id="d", text="  \n ")) == []


def test_max_tokens_validated():
    with pytest.raises(ValidationError):
        chunk_document(Document(doc_id="d", text="hi"), max_tokens=0)


def test_hard_split_long_sentence():
    # one sentence of 10 word tokens, no terminal punctuation
    doc = Document(doc_id="d", text=" ".join(f"w{i}" for i in range(10)))
    chunks = chunk_document(doc, max_tokens=4)
    assert [c.token_count for c in chunks] == [4, 4, 2]
    rebuilt = [t for c in chunks for t in tokenize(c.text)]
    assert rebuilt == tokenize(doc.text)


def test_hard_split_pieces_do_not_absorb_neighbours():
    # a short sentence after a hard-split one must start its own chunk
    long = " ".join(f"w{i}" for i in range(5)) + "."
    doc = Document(doc_id="d", text=long + " Tail.")
    chunks = chunk_document(doc, max_tokens=4)
    # 6 tokens hard-split into 4+2, then the 2-token tail sentence separately
    assert [c.token_count for c in chunks] == [4, 2, 2]
    assert chunks[2].text == "Tail."


def test_invariants_on_synthetic_corpus():
    docs = synthetic_documents(50, seed=11, sentences=8)
    for max_tokens in (7, 16, 64, 512):
        for doc in docs:
            _assert_chunk_invariants(doc, chunk_document(doc, max_tokens), max_tokens)


@settings(max_examples=150, deadline=None)
@given(
    text=st.text(
        alphabet=st.characters(codec="utf-8", exclude_categories=("Cs",)),
        max_size=400,
    ),
    max_tokens=st.integers(min_value=1, max_value=40),
)
def test_invariants_property(text, max_tokens):
    doc = Document(doc_id="d", text=text)
    _assert_chunk_invariants(doc, chunk_document(doc, max_tokens), max_tokens)


def test_load_corpus_round_trip(tmp_path, small_docs):
    path = tmp_path / "corpus.jsonl"
    write_corpus_file(path, small_docs)
    loaded = load_corpus(path)
    assert loaded == small_docs


def test_load_corpus_rejects_duplicates(tmp_path):
    path = tmp_path / "dup.jsonl"
    rec = json.dumps({"doc_id": "d1", "text": "x"})
    path.write_text(rec + "\n" + rec + "\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="duplicate doc_id"):
        load_corpus(path)


def test_load_corpus_rejects_missing_fields(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"text": "no id"}\n', encoding="utf-8")
    with pytest.raises(ParseError, match="doc_id"):
        load_corpus(path)
    path.write_text('{"doc_id": "d", "metadata": {"k": 1}, "text": "t"}\n', encoding="utf-8")
    with pytest.raises(ParseError, match="metadata"):
        load_corpus(path)


def test_chunks_file_round_trip(tmp_path, small_docs):
    chunks = chunk_corpus(small_docs, max_tokens=32)
    path = tmp_path / "chunks.jsonl"
    write_chunks(path, chunks)
    assert read_chunks(path) == chunks


def test_read_chunks_missing_field(tmp_path):
    path = tmp_path / "short.jsonl"
    path.write_text('{"chunk_id": "a#0", "doc_id": "a", "text": "t"}\n', encoding="utf-8")
    with pytest.raises(ParseError, match="token_count"):
        read_chunks(path)
