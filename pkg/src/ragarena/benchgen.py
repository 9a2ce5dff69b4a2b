"""Synthetic Q&A benchmark generation driven by a declarative category config."""
import json
import logging
import re
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Document
from .errors import ConfigurationError, GenerationError, ValidationError
from .jsonl import write_jsonl
from .pipeline import GenerationClient

log = logging.getLogger(__name__)

_WEIGHT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Category:
    label: str
    weight: float
    prompt_fragment: str = ""


@dataclass(frozen=True)
class Categorization:
    name: str
    categories: tuple[Category, ...]


@dataclass
class BenchConfig:
    categorizations: list[Categorization]
    personas: list[Category]
    multi_doc_categories: frozenset[str] = frozenset()

    def validate(self) -> None:
        problems = []
        if not self.categorizations:
            problems.append("at least one categorization is required")
        if not self.personas:
            problems.append("personas must be non-empty")
        for cat in self.categorizations:
            if not cat.categories:
                problems.append(f"categorization {cat.name!r} has no categories")
                continue
            if any(c.weight <= 0 for c in cat.categories):
                problems.append(f"categorization {cat.name!r} has a non-positive weight")
            total = sum(c.weight for c in cat.categories)
            if abs(total - 1.0) > _WEIGHT_TOLERANCE:
                problems.append(f"categorization {cat.name!r} weights sum to {total}, not 1")
        if any(p.weight <= 0 for p in self.personas):
            problems.append("personas have a non-positive weight")
        if problems:
            raise ValidationError("; ".join(problems))


@dataclass(frozen=True)
class QAPair:
    question_id: str
    question: str
    reference_answer: str
    source_doc_ids: tuple[str, ...]
    combination: dict[str, str]
    persona: str


def config_to_dict(config: BenchConfig) -> dict:
    return {
        "categorizations": [
            {
                "name": cat.name,
                "categories": [
                    {"label": c.label, "weight": c.weight, "prompt_fragment": c.prompt_fragment}
                    for c in cat.categories
                ],
            }
            for cat in config.categorizations
        ],
        "personas": [
            {"label": p.label, "weight": p.weight, "prompt_fragment": p.prompt_fragment}
            for p in config.personas
        ],
        "multi_doc_categories": sorted(config.multi_doc_categories),
    }


def config_from_dict(payload: dict) -> BenchConfig:
    try:
        config = BenchConfig(
            categorizations=[
                Categorization(
                    name=cat["name"],
                    categories=tuple(
                        Category(c["label"], float(c["weight"]), c.get("prompt_fragment", ""))
                        for c in cat["categories"]
                    ),
                )
                for cat in payload["categorizations"]
            ],
            personas=[
                Category(p["label"], float(p["weight"]), p.get("prompt_fragment", ""))
                for p in payload["personas"]
            ],
            multi_doc_categories=frozenset(payload.get("multi_doc_categories", [])),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed benchmark config: {exc}") from exc
    config.validate()
    return config


def load_config(path: str | Path) -> BenchConfig:
    return config_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_config(config: BenchConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2) + "\n", encoding="utf-8")


def default_config() -> BenchConfig:
    return load_config(Path(__file__).parent / "data" / "benchgen_default.json")


def sample_combination(
    config: BenchConfig, rng: np.random.Generator | int
) -> tuple[dict[str, str], str]:
    """Draw one label per categorization plus a persona, all independently by weight."""
    config.validate()
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    combination = {}
    for cat in config.categorizations:
        weights = np.array([c.weight for c in cat.categories])
        idx = rng.choice(len(cat.categories), p=weights / weights.sum())
        combination[cat.name] = cat.categories[idx].label
    persona_weights = np.array([p.weight for p in config.personas])
    pick = rng.choice(len(config.personas), p=persona_weights / persona_weights.sum())
    return combination, config.personas[pick].label


_QA_RE = re.compile(r"Question:\s*(?P<question>.+?)\s*Answer:\s*(?P<answer>.+)", re.DOTALL)

GENERATION_TEMPLATE = """\
Write one question and its answer, grounded only in the source documents.
Asker profile: {persona}
Question requirements:
{requirements}

Source documents:
{documents}

Respond in exactly this form:
Question: <the question>
Answer: <the answer>"""


def build_generation_prompt(
    config: BenchConfig, combination: dict[str, str], persona: str, documents: Sequence[Document]
) -> str:
    fragments = []
    for cat in config.categorizations:
        label = combination[cat.name]
        category = next(c for c in cat.categories if c.label == label)
        if category.prompt_fragment:
            fragments.append(f"- {category.prompt_fragment}")
    persona_fragment = next((p.prompt_fragment for p in config.personas if p.label == persona), persona)
    doc_block = "\n".join(f"[{i}] {doc.text}" for i, doc in enumerate(documents, start=1))
    return GENERATION_TEMPLATE.format(
        persona=persona_fragment or persona,
        requirements="\n".join(fragments) or "- none",
        documents=doc_block,
    )


_PROMPT_DOC_RE = re.compile(r"^\[\d+\] (?P<text>.+)$", re.MULTILINE)


class StubGenerationClient:
    """Offline generator for dry runs: derives the pair from the source documents.

    The question quotes the opening words of the first document and the answer
    is its first sentence, so the pair is grounded, distinct per document, and
    always parseable.
    """

    def generate(self, prompt: str) -> str:
        from .corpus import sentence_breaks

        docs = [m.group("text") for m in _PROMPT_DOC_RE.finditer(prompt)]
        if not docs:
            raise GenerationError("prompt has no document block")
        first = docs[0]
        lead_words = " ".join(first.split()[:8])
        sentences = [doc[:sentence_breaks(doc)[0]].strip() for doc in docs]
        return f"Question: What do the sources say about {lead_words}? Answer: {' '.join(sentences)}"


def generate_qa(
    config: BenchConfig,
    combination: dict[str, str],
    persona: str,
    documents: Sequence[Document],
    client: GenerationClient,
    question_id: str = "q0",
) -> QAPair:
    """Generate one Q&A pair; raises GenerationError when the output has no
    parseable Question/Answer sections."""
    names = {cat.name for cat in config.categorizations}
    if set(combination) != names:
        raise ValidationError("combination must assign exactly one label per categorization")
    needs_multi = any(label in config.multi_doc_categories for label in combination.values())
    if needs_multi and len(documents) < 2:
        raise ValidationError("this combination requires at least two source documents")
    if not documents:
        raise ValidationError("at least one source document is required")
    prompt = build_generation_prompt(config, combination, persona, documents)
    raw = client.generate(prompt)
    match = _QA_RE.search(raw)
    if not match:
        raise GenerationError(f"client output has no Question/Answer sections: {raw[:80]!r}")
    return QAPair(
        question_id=question_id,
        question=match["question"].strip(),
        reference_answer=match["answer"].strip(),
        source_doc_ids=tuple(doc.doc_id for doc in documents),
        combination=dict(combination),
        persona=persona,
    )


def generate_benchmark(
    config: BenchConfig,
    corpus: Sequence[Document],
    n: int,
    client: GenerationClient,
    rng_seed: int = 0,
) -> list[QAPair]:
    """Attempt n items; failed generations are logged and skipped.

    Each item gets its own child RNG spawned from the root seed, so the
    sampled combinations and documents never depend on worker scheduling.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if not corpus:
        raise ValidationError("corpus is empty")
    config.validate()
    children = np.random.SeedSequence(rng_seed).spawn(n)
    out: list[QAPair] = []
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        combination, persona = sample_combination(config, rng)
        needs_multi = any(label in config.multi_doc_categories for label in combination.values())
        count = 2 if needs_multi else 1
        if len(corpus) < count:
            log.warning("item %d skipped: corpus smaller than %d documents", i, count)
            continue
        picks = rng.choice(len(corpus), size=count, replace=False)
        documents = [corpus[int(p)] for p in picks]
        try:
            out.append(generate_qa(config, combination, persona, documents, client,
                                   question_id=f"q{i:05d}"))
        except GenerationError as exc:
            log.warning("item %d skipped: %s", i, exc)
    return out


def qa_to_dict(item: QAPair) -> dict:
    return {
        "id": item.question_id,
        "question": item.question,
        "answer": item.reference_answer,
        "doc_ids": list(item.source_doc_ids),
        "combination": item.combination,
        "persona": item.persona,
    }


def qa_from_dict(obj: dict) -> QAPair:
    return QAPair(
        question_id=obj["id"],
        question=obj["question"],
        reference_answer=obj["answer"],
        source_doc_ids=tuple(obj["doc_ids"]),
        combination=dict(obj["combination"]),
        persona=obj["persona"],
    )


def write_benchmark(path: str | Path, items: Sequence[QAPair]) -> int:
    return write_jsonl(path, (qa_to_dict(item) for item in items))


def read_benchmark(path: str | Path) -> list[QAPair]:
    from .jsonl import read_jsonl

    items = []
    for line_no, obj in read_jsonl(path):
        try:
            items.append(qa_from_dict(obj))
        except KeyError as exc:
            raise ValidationError(f"benchmark record on line {line_no} missing field {exc}") from exc
    return items
