"""Document loading and sentence-aligned chunking."""
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ValidationError
from .jsonl import read_jsonl, write_jsonl

# Words are maximal \w runs; every other non-space character is its own token.
# Keeping punctuation as tokens makes the chunk partition exactly reversible.
_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

_SENTENCE_END = frozenset(".!?")

# Trailing words that keep a following period from ending the sentence.
_ABBREVIATIONS = frozenset({
    "mr", "mrs", "ms", "dr", "prof", "st", "no", "vs", "etc", "fig",
    "e.g", "i.e", "al", "inc", "jr", "sr", "cf", "approx",
})


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_id: str
    text: str
    token_count: int


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def token_spans(text: str) -> list[tuple[int, int]]:
    """Character (start, end) span of every token, in order."""
    return [m.span() for m in _TOKEN_RE.finditer(text)]


def sentence_breaks(text: str) -> list[int]:
    """Character offsets where a sentence ends (exclusive), final offset included.

    A sentence ends after '.', '!' or '?' when followed by whitespace or the end
    of text, unless the word before a period is a known abbreviation. A blank
    line also ends a sentence.
    """
    breaks = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch in _SENTENCE_END:
            if i + 1 < n and not text[i + 1].isspace():
                continue
            if ch == "." and _preceding_word(text, i).lower() in _ABBREVIATIONS:
                continue
            breaks.append(i + 1)
        elif ch == "\n" and i + 1 < n and text[i + 1] == "\n":
            breaks.append(i + 1)
    if not breaks or breaks[-1] != n:
        breaks.append(n)
    return breaks


def _preceding_word(text: str, i: int) -> str:
    j = i
    while j > 0 and (text[j - 1].isalnum() or text[j - 1] == "."):
        j -= 1
    return text[j:i].rstrip(".")


def chunk_document(doc: Document, max_tokens: int = 512) -> list[Chunk]:
    """Greedily pack whole sentences into chunks of at most max_tokens tokens.

    A sentence that would overflow the open chunk starts a new one. A single
    sentence longer than max_tokens is hard-split at token boundaries into
    standalone max_tokens-sized pieces; those pieces never absorb neighbours.
    """
    if max_tokens < 1:
        raise ValidationError(f"max_tokens must be >= 1, got {max_tokens}")
    spans = token_spans(doc.text)
    if not spans:
        return []

    sentences = _group_by_sentence(doc.text, spans)
    chunks: list[Chunk] = []
    open_tokens: list[tuple[int, int]] = []

    def flush():
        if open_tokens:
            chunks.append(_make_chunk(doc, len(chunks), open_tokens))
            open_tokens.clear()

    for sent in sentences:
        if len(sent) > max_tokens:
            flush()
            for i in range(0, len(sent), max_tokens):
                chunks.append(_make_chunk(doc, len(chunks), sent[i:i + max_tokens]))
            continue
        if len(open_tokens) + len(sent) > max_tokens:
            flush()
        open_tokens.extend(sent)
    flush()
    return chunks


def _group_by_sentence(text: str, spans: list[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    breaks = sentence_breaks(text)
    sentences: list[list[tuple[int, int]]] = []
    current: list[tuple[int, int]] = []
    bi = 0
    for span in spans:
        while span[0] >= breaks[bi]:
            bi += 1
            if current:
                sentences.append(current)
                current = []
        current.append(span)
    if current:
        sentences.append(current)
    return sentences


def doc_id_of(chunk_id: str) -> str:
    """Owning document of a chunk id minted by chunk_document."""
    return chunk_id.rsplit("#", 1)[0]


def _make_chunk(doc: Document, ordinal: int, tokens: list[tuple[int, int]]) -> Chunk:
    text = doc.text[tokens[0][0]:tokens[-1][1]]
    return Chunk(
        chunk_id=f"{doc.doc_id}#{ordinal}",
        doc_id=doc.doc_id,
        text=text,
        token_count=len(tokens),
    )


def load_corpus(path: str | Path) -> list[Document]:
    """Read a JSONL corpus; each line needs `doc_id` and `text`, `metadata` optional."""
    docs: list[Document] = []
    seen: set[str] = set()
    for line_no, record in read_jsonl(path):
        doc_id = record.get("doc_id")
        if not isinstance(doc_id, str) or not doc_id:
            raise ParseError("missing or empty `doc_id`", line_no)
        text = record.get("text")
        if not isinstance(text, str):
            raise ParseError(f"missing `text` for doc_id {doc_id!r}", line_no)
        metadata = record.get("metadata", {})
        if not isinstance(metadata, dict) or any(
            not isinstance(k, str) or not isinstance(v, str) for k, v in metadata.items()
        ):
            raise ParseError(f"`metadata` must map strings to strings for doc_id {doc_id!r}", line_no)
        if doc_id in seen:
            raise ValidationError(f"duplicate doc_id {doc_id!r} (line {line_no})")
        seen.add(doc_id)
        docs.append(Document(doc_id=doc_id, text=text, metadata=dict(metadata)))
    return docs


def chunk_corpus(docs: list[Document], max_tokens: int = 512) -> list[Chunk]:
    out: list[Chunk] = []
    for doc in docs:
        out.extend(chunk_document(doc, max_tokens))
    return out


def write_chunks(path: str | Path, chunks: list[Chunk]) -> int:
    return write_jsonl(path, (
        {
            "chunk_id": c.chunk_id,
            "doc_id": c.doc_id,
            "text": c.text,
            "token_count": c.token_count,
        }
        for c in chunks
    ))


def read_chunks(path: str | Path) -> list[Chunk]:
    chunks: list[Chunk] = []
    for line_no, record in read_jsonl(path):
        try:
            chunks.append(Chunk(
                chunk_id=record["chunk_id"],
                doc_id=record["doc_id"],
                text=record["text"],
                token_count=record["token_count"],
            ))
        except KeyError as exc:
            raise ParseError(f"chunk record missing field {exc}", line_no) from exc
    return chunks
