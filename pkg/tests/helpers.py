"""Shared builders for deterministic toy corpora and records."""
import json
import random

from ragarena.benchgen import QAPair
from ragarena.corpus import Chunk, Document, sentence_breaks, token_spans, tokenize
from ragarena.pipeline import AnswerRecord

_TOPICS = [
    "volcanoes", "honey bees", "steam engines", "coral reefs", "glaciers",
    "owls", "windmills", "lighthouses", "ferns", "meteor showers",
    "salt marshes", "geysers", "limestone caves", "tidal pools", "peat bogs",
]

_FACTS = [
    "form over many years", "depend on stable temperatures",
    "were studied throughout the 1800s", "appear on several continents",
    "interact with their surroundings", "have inspired local legends",
    "support nearby communities", "change with the seasons",
    "attract careful observers", "resist simple classification",
]


def synthetic_documents(n: int, seed: int = 0, sentences: int = 5) -> list[Document]:
    """Deterministic toy corpus with topic words that make retrieval meaningful."""
    rng = random.Random(seed)
    docs = []
    for i in range(n):
        topic = _TOPICS[i % len(_TOPICS)]
        parts = [f"This document describes {topic} (entry {i}) in detail."]
        parts += [
            f"{topic.capitalize()} {fact}." for fact in rng.sample(_FACTS, sentences)
        ]
        docs.append(Document(
            doc_id=f"doc{i:04d}",
            text=" ".join(parts),
            metadata={"topic": topic},
        ))
    return docs


def write_corpus_file(path, docs: list[Document]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps({
                "doc_id": doc.doc_id, "text": doc.text, "metadata": doc.metadata,
            }) + "\n")


def make_qa(i: int, question: str = "", answer: str = "") -> QAPair:
    return QAPair(
        question_id=f"q{i:05d}",
        question=question or f"What is known about entry {i}?",
        reference_answer=answer or f"Entry {i} is a well documented item.",
        source_doc_ids=(f"doc{i:04d}",),
        combination={"answer-type": "factoid"},
        persona="novice",
    )


def assert_chunk_invariants(doc: Document, chunks: list[Chunk], max_tokens: int) -> None:
    """Chunking contract: size cap, losslessness, sentence-aligned boundaries."""
    doc_tokens = tokenize(doc.text)
    rebuilt: list[str] = []
    for c in chunks:
        assert c.doc_id == doc.doc_id
        assert c.token_count <= max_tokens
        assert c.token_count == len(tokenize(c.text)) > 0
        assert c.text in doc.text
        rebuilt.extend(tokenize(c.text))
    # losslessness: chunking partitions the token stream in order
    assert rebuilt == doc_tokens

    # boundary rule: a chunk break inside a sentence only happens when that
    # sentence alone exceeds max_tokens
    breaks = sentence_breaks(doc.text)
    spans = token_spans(doc.text)
    sent_of: list[int] = []
    bi = 0
    for a, _ in spans:
        while a >= breaks[bi]:
            bi += 1
        sent_of.append(bi)
    sent_sizes: dict[int, int] = {}
    for s in sent_of:
        sent_sizes[s] = sent_sizes.get(s, 0) + 1
    pos = 0
    for c in chunks[:-1]:
        pos += c.token_count
        last, nxt = sent_of[pos - 1], sent_of[pos]
        if last == nxt:
            assert sent_sizes[last] > max_tokens


def make_answer(question_id: str, answer: str, passages=None) -> AnswerRecord:
    return AnswerRecord(
        question_id=question_id,
        answer=answer,
        passages=passages if passages is not None else [(answer, ["doc0000"])],
        final_prompt=f"prompt for {question_id}",
    )
