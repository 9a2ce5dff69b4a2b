"""Claim-level answer evaluation: coverage, relatedness, correctness, faithfulness.

Score ranges: coverage [-1,1], relatedness [0,1], correctness [-1,2],
faithfulness [-1,1]. Every generated answer is truncated to its first 300
whitespace-delimited words before claims are extracted, and only the first 10
submitted passages count toward faithfulness.
"""
import re
from collections.abc import Sequence
from dataclasses import dataclass
from statistics import fmean
from typing import Protocol

from .benchgen import QAPair
from .errors import ValidationError
from .pipeline import AnswerRecord

DIRECT = "Direct"
USEFUL = "Useful"
USELESS = "Useless"

_WORD_RE = re.compile(r"\S+")

# Minimal function-word list for the mock classifier's content-word overlap.
_STOPWORDS = frozenset("""
a an and are as at be but by did do does for from had has have how i in is it
its of on or that the this to was were what when where which who why will with
""".split())


class JudgeBackend(Protocol):
    def extract_claims(self, text: str) -> list[str]: ...

    def classify(self, claim: str, question: str) -> str: ...

    def nli(self, premise: str, hypothesis: str) -> int: ...


@dataclass(frozen=True)
class ClaimJudgment:
    claim: str
    klass: str
    verdicts: tuple[int, ...] = ()


@dataclass(frozen=True)
class JudgeConfig:
    alpha: float = 0.7
    answer_word_cap: int = 300
    passage_cap: int = 10

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must be in [0,1], got {self.alpha}")
        if self.answer_word_cap < 1 or self.passage_cap < 1:
            raise ValidationError("caps must be positive")


@dataclass(frozen=True)
class QuestionScore:
    question_id: str
    coverage: float
    relatedness: float
    correctness: float
    faithfulness: float
    abstained: bool = False
    flags: tuple[str, ...] = ()


class MockJudgeBackend:
    """Deterministic, model-free judge.

    Claims are sentences. A claim is Useless when it carries the "[noise]"
    marker, Direct when it shares a non-stopword word with the question, else
    Useful. NLI is substring-based: an empty hypothesis is entailed; a premise
    containing "not <hypothesis>" contradicts; a premise containing the
    hypothesis entails; anything else is neutral.
    """

    def extract_claims(self, text: str) -> list[str]:
        from .corpus import sentence_breaks

        claims = []
        start = 0
        for end in sentence_breaks(text):
            sentence = text[start:end].strip()
            if sentence:
                claims.append(sentence)
            start = end
        return claims

    def classify(self, claim: str, question: str) -> str:
        if "[noise]" in claim:
            return USELESS
        claim_words = {w for w in re.findall(r"\w+", claim.lower()) if w not in _STOPWORDS}
        question_words = {w for w in re.findall(r"\w+", question.lower()) if w not in _STOPWORDS}
        if claim_words & question_words:
            return DIRECT
        return USEFUL

    def nli(self, premise: str, hypothesis: str) -> int:
        norm_h = _normalize(hypothesis)
        if not norm_h:
            return 1
        norm_p = _normalize(premise)
        if "not " + norm_h in norm_p:
            return -1
        if norm_h in norm_p:
            return 1
        return 0


def _normalize(text: str) -> str:
    return " ".join(text.lower().split())


CLAIM_PROMPT = """\
Split the text below into atomic claims. Write one claim per line and nothing
else. A claim is a single self-contained factual statement.

Text:
{text}

Claims:"""

CLASSIFY_PROMPT = """\
Question: {question}
Claim: {claim}

Classify the claim's relation to the question. Answer with exactly one word:
Direct if it directly answers the question, Useful if it is relevant context
but not an answer, Useless otherwise."""

NLI_PROMPT = """\
Premise: {premise}
Hypothesis: {hypothesis}

Does the premise entail the hypothesis? Answer with exactly one token:
1 for entailment, -1 for contradiction, 0 for neutral."""

_VERDICT_RE = re.compile(r"-1|0|1")
_CLASS_RE = re.compile(r"direct|useful|useless", re.IGNORECASE)


class HTTPJudgeBackend:
    """Judge backed by a completion endpoint, using the prompt set above.

    Each operation is one completion call, retried with exponential backoff
    before giving up with a transport error.
    """

    def __init__(self, client, attempts: int = 3, backoff: float = 0.5):
        self.client = client
        self.attempts = attempts
        self.backoff = backoff

    def _complete(self, prompt: str) -> str:
        import time

        from .errors import TransportError

        last: Exception | None = None
        for attempt in range(self.attempts):
            try:
                return self.client.generate(prompt)
            except Exception as exc:
                last = exc
                if attempt + 1 < self.attempts:
                    time.sleep(self.backoff * 2 ** attempt)
        raise TransportError(f"judge backend failed: {last}", attempts=self.attempts)

    def extract_claims(self, text: str) -> list[str]:
        response = self._complete(CLAIM_PROMPT.format(text=text))
        claims = []
        for line in response.splitlines():
            line = line.strip().lstrip("-*").strip()
            if line:
                claims.append(line)
        return claims

    def classify(self, claim: str, question: str) -> str:
        response = self._complete(CLASSIFY_PROMPT.format(question=question, claim=claim))
        match = _CLASS_RE.search(response)
        if match is None:
            raise ValidationError(f"unparseable classification: {response!r}")
        return match.group(0).capitalize()

    def nli(self, premise: str, hypothesis: str) -> int:
        response = self._complete(NLI_PROMPT.format(premise=premise, hypothesis=hypothesis))
        match = _VERDICT_RE.search(response)
        if match is None:
            raise ValidationError(f"unparseable NLI verdict: {response!r}")
        return int(match.group(0))


def truncate_words(text: str, cap: int) -> str:
    """Cut after the cap-th whitespace-delimited word, preserving layout."""
    for i, match in enumerate(_WORD_RE.finditer(text), start=1):
        if i == cap:
            return text[: match.end()]
    return text


def nli(premise: str, hypothesis: str, backend: JudgeBackend) -> int:
    verdict = backend.nli(premise, hypothesis)
    if verdict not in (-1, 0, 1):
        raise ValidationError(f"NLI backend returned {verdict!r}, expected -1, 0 or 1")
    return verdict


def coverage_from_verdicts(direct: Sequence[int], useful: Sequence[int], alpha: float) -> tuple[float, tuple[str, ...]]:
    """Weighted mean of entailment verdicts over Direct and Useful reference claims.

    When one class is absent its weight moves to the other; when both are
    absent the score is 0 and flagged degenerate.
    """
    if direct and useful:
        return alpha * fmean(direct) + (1.0 - alpha) * fmean(useful), ()
    if direct:
        return fmean(direct), ()
    if useful:
        return fmean(useful), ()
    return 0.0, ("coverage_degenerate",)


def coverage(
    answer: str,
    reference: str,
    question: str,
    backend: JudgeBackend,
    alpha: float = 0.7,
) -> tuple[float, tuple[str, ...]]:
    """Score how much of the reference answer's content the answer entails."""
    if not reference:
        raise ValidationError("reference answer is empty")
    claims = backend.extract_claims(reference)
    if not claims:
        return 0.0, ("coverage_no_claims",)
    direct: list[int] = []
    useful: list[int] = []
    for claim in claims:
        klass = backend.classify(claim, question)
        if klass == DIRECT:
            direct.append(nli(answer, claim, backend))
        elif klass == USEFUL:
            useful.append(nli(answer, claim, backend))
    return coverage_from_verdicts(direct, useful, alpha)


def relatedness(answer: str, question: str, backend: JudgeBackend) -> tuple[float, tuple[str, ...]]:
    """Direct / (Direct + Useless) over the answer's own claims; Useful claims
    count toward neither side."""
    claims = backend.extract_claims(answer)
    n_direct = n_useless = 0
    for claim in claims:
        klass = backend.classify(claim, question)
        if klass == DIRECT:
            n_direct += 1
        elif klass == USELESS:
            n_useless += 1
    if n_direct + n_useless == 0:
        return 0.0, ("relatedness_degenerate",)
    return n_direct / (n_direct + n_useless), ()


def correctness(cov: float, rel: float) -> float:
    """Combine coverage and relatedness onto [-1, 2].

    Non-positive coverage passes through unchanged; positive coverage maps to
    twice the harmonic mean of the two, hitting 2 exactly at (1, 1).
    """
    if not -1.0 <= cov <= 1.0:
        raise ValidationError(f"coverage {cov} outside [-1,1]")
    if not 0.0 <= rel <= 1.0:
        raise ValidationError(f"relatedness {rel} outside [0,1]")
    if cov <= 0.0:
        return cov
    return 2.0 * (2.0 * cov * rel) / (cov + rel)


def faithfulness(
    answer: str,
    passages: Sequence[str],
    backend: JudgeBackend,
    passage_cap: int = 10,
) -> tuple[float, tuple[str, ...]]:
    """Mean, over the answer's claims, of the best entailment any counted
    passage gives that claim. No claims or no passages scores 0, flagged."""
    claims = backend.extract_claims(answer)
    counted = list(passages[:passage_cap])
    if not claims or not counted:
        return 0.0, ("faithfulness_degenerate",)
    per_claim = [max(nli(passage, claim, backend) for passage in counted) for claim in claims]
    return fmean(per_claim), ()


def evaluate_submission(
    benchmark: Sequence[QAPair],
    answers: Sequence[AnswerRecord],
    backend: JudgeBackend,
    config: JudgeConfig = JudgeConfig(),
) -> tuple[list[QuestionScore], dict]:
    """Score every benchmark question; unanswered ones abstain and score 0.

    Aggregates are plain means over all benchmark questions.
    """
    known = {qa.question_id for qa in benchmark}
    by_id: dict[str, AnswerRecord] = {}
    for record in answers:
        if record.question_id not in known:
            raise ValidationError(f"answer for unknown question_id {record.question_id!r}")
        by_id[record.question_id] = record

    scores: list[QuestionScore] = []
    for qa in benchmark:
        record = by_id.get(qa.question_id)
        if record is None:
            scores.append(QuestionScore(qa.question_id, 0.0, 0.0, 0.0, 0.0, abstained=True))
            continue
        answer = truncate_words(record.answer, config.answer_word_cap)
        cov, cov_flags = coverage(answer, qa.reference_answer, qa.question, backend, config.alpha)
        rel, rel_flags = relatedness(answer, qa.question, backend)
        corr = correctness(cov, rel)
        faith, faith_flags = faithfulness(
            answer, [text for text, _ in record.passages], backend, config.passage_cap
        )
        scores.append(QuestionScore(
            qa.question_id, cov, rel, corr, faith,
            flags=cov_flags + rel_flags + faith_flags,
        ))
    aggregate = {
        "questions": len(scores),
        "abstentions": sum(1 for s in scores if s.abstained),
        "correctness": fmean(s.correctness for s in scores) if scores else 0.0,
        "faithfulness": fmean(s.faithfulness for s in scores) if scores else 0.0,
    }
    return scores, aggregate
