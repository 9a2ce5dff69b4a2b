"""Answer pipeline: retrieve, assemble the prompt, generate, record.

The answers file format is fixed: one JSON object per line with fields
`id`, `answer`, `passages` (array of {"passage", "doc_IDs"}), `final_prompt`.
"""
import logging
import time
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .corpus import doc_id_of
from .dense import DenseIndex, Embedder
from .errors import ParseError, ValidationError
from .jsonl import read_jsonl, write_jsonl
from .retrieval import RetrievalConfig, RetrievedPassage, retrieve
from .sparse import SparseIndex

log = logging.getLogger(__name__)

DEFAULT_TEMPLATE = """\
Answer the question using only the numbered passages. If they do not contain
the answer, say so.

{passages}

Question: {question}
Answer:"""

SCORE_DESCENDING = "score_descending"
SCORE_ASCENDING = "score_ascending"


@dataclass(frozen=True)
class AnswerRecord:
    question_id: str
    answer: str
    passages: list[tuple[str, list[str]]]
    final_prompt: str


class GenerationClient(Protocol):
    def generate(self, prompt: str) -> str: ...


class EchoClient:
    """Deterministic mock: answers with the question section of the prompt."""

    def generate(self, prompt: str) -> str:
        tail = prompt.rsplit("Question:", 1)[-1]
        return tail.split("Answer:", 1)[0].strip()


class HTTPGenerationClient:
    """POST {"prompt": ...} -> {"text": ...}, bearer-token auth."""

    def __init__(self, url: str, api_key: str = "", timeout: float = 60.0):
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    def generate(self, prompt: str) -> str:
        import httpx

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        response = httpx.post(self.url, json={"prompt": prompt}, headers=headers, timeout=self.timeout)
        response.raise_for_status()
        return response.json()["text"]


def assemble_prompt(
    question: str,
    passages: Sequence[RetrievedPassage],
    order: str = SCORE_DESCENDING,
    template: str = DEFAULT_TEMPLATE,
) -> str:
    """Instantiate the template with numbered passages in the requested order."""
    if not passages:
        raise ValidationError("cannot assemble a prompt with no passages")
    if "{passages}" not in template or "{question}" not in template:
        raise ValidationError("template must contain {passages} and {question} placeholders")
    if order not in (SCORE_DESCENDING, SCORE_ASCENDING):
        raise ValidationError(f"unknown passage order {order!r}")
    ordered = list(passages) if order == SCORE_DESCENDING else list(reversed(passages))
    block = "\n".join(f"[{i}] {p.text}" for i, p in enumerate(ordered, start=1))
    return template.format(passages=block, question=question)


@dataclass
class PipelineConfig:
    retrieval: RetrievalConfig | None = None
    passage_order: str = SCORE_DESCENDING
    template: str = DEFAULT_TEMPLATE
    attempts: int = 3
    backoff: float = 0.5
    workers: int = 4


def answer_question(
    question_id: str,
    question: str,
    sparse_index: SparseIndex,
    dense_index: DenseIndex,
    embedder: Embedder,
    texts: Mapping[str, str],
    client: GenerationClient,
    config: PipelineConfig | None = None,
) -> AnswerRecord | None:
    """Produce one AnswerRecord, or None when the question is abstained.

    Generation is retried with exponential backoff; a question whose retries
    are exhausted (or that retrieves nothing) becomes an abstention.
    """
    config = config or PipelineConfig()
    passages = retrieve(question, sparse_index, dense_index, embedder, texts, config.retrieval)
    if not passages:
        log.warning("question %s retrieved nothing; abstaining", question_id)
        return None
    prompt = assemble_prompt(question, passages, config.passage_order, config.template)
    answer = None
    for attempt in range(config.attempts):
        try:
            answer = client.generate(prompt)
            break
        except Exception as exc:
            log.warning("generation attempt %d for %s failed: %s", attempt + 1, question_id, exc)
            if attempt + 1 < config.attempts and config.backoff > 0:
                time.sleep(config.backoff * 2**attempt)
    if answer is None:
        log.warning("question %s abstained after %d attempts", question_id, config.attempts)
        return None
    return AnswerRecord(
        question_id=question_id,
        answer=answer,
        passages=[(p.text, [doc_id_of(p.chunk_id)]) for p in passages],
        final_prompt=prompt,
    )


def answer_batch(
    questions: Sequence[tuple[str, str]],
    sparse_index: SparseIndex,
    dense_index: DenseIndex,
    embedder: Embedder,
    texts: Mapping[str, str],
    client: GenerationClient,
    config: PipelineConfig | None = None,
) -> tuple[list[AnswerRecord], list[str]]:
    """Answer (question_id, question) pairs in parallel.

    Returns records sorted by question_id plus the ids that abstained.
    """
    config = config or PipelineConfig()

    def run(item: tuple[str, str]) -> tuple[str, AnswerRecord | None]:
        qid, question = item
        return qid, answer_question(
            qid, question, sparse_index, dense_index, embedder, texts, client, config
        )

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        results = list(pool.map(run, questions))
    records = sorted((rec for _, rec in results if rec is not None), key=lambda r: r.question_id)
    abstained = sorted(qid for qid, rec in results if rec is None)
    return records, abstained


def answer_to_dict(rec: AnswerRecord) -> dict:
    return {
        "id": rec.question_id,
        "answer": rec.answer,
        "passages": [{"passage": text, "doc_IDs": doc_ids} for text, doc_ids in rec.passages],
        "final_prompt": rec.final_prompt,
    }


def answer_from_dict(obj: dict) -> AnswerRecord:
    """Build a record from its wire form; raises KeyError on missing fields."""
    passages = [(p["passage"], list(p["doc_IDs"])) for p in obj["passages"]]
    return AnswerRecord(
        question_id=obj["id"],
        answer=obj["answer"],
        passages=passages,
        final_prompt=obj["final_prompt"],
    )


def write_answers(path: str | Path, records: Sequence[AnswerRecord]) -> int:
    return write_jsonl(path, (answer_to_dict(rec) for rec in records))


def read_answers(path: str | Path) -> list[AnswerRecord]:
    records = []
    for line_no, obj in read_jsonl(path):
        try:
            records.append(answer_from_dict(obj))
        except KeyError as exc:
            raise ParseError(f"answer record missing field {exc}", line_no) from exc
    return records
