"""Human Likert annotations: ingestion, Borda aggregation, score correlation."""
import csv
import json
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError

METRICS = ("coverage", "relatedness", "quality")

CSV_HEADER = ["question_id", "team_id", "annotator_id", "coverage", "relatedness", "quality"]


@dataclass(frozen=True)
class AnnotationEntry:
    question_id: str
    team_id: str
    annotator_id: str
    coverage: int
    relatedness: int
    quality: int


@dataclass
class AnnotationSet:
    entries: list[AnnotationEntry]

    def __post_init__(self) -> None:
        self._seen: set[tuple[str, str, str]] = set()
        existing, self.entries = self.entries, []
        for entry in existing:
            self.add(entry)

    def add(self, entry: AnnotationEntry) -> None:
        _validate_likert(entry)
        key = (entry.question_id, entry.team_id, entry.annotator_id)
        if key in self._seen:
            raise ValidationError(f"duplicate annotation for {key}")
        self._seen.add(key)
        self.entries.append(entry)


def _validate_likert(entry: AnnotationEntry) -> None:
    for metric in METRICS:
        value = getattr(entry, metric)
        if not isinstance(value, int) or isinstance(value, bool) or value not in (0, 1, 2):
            raise ValidationError(
                f"{metric} score {value!r} for ({entry.question_id}, {entry.team_id}) "
                "is outside the 0-2 Likert range"
            )


def ingest_annotations(path: str | Path) -> AnnotationSet:
    """Read the annotations CSV; duplicates and out-of-range scores are errors."""
    entries: list[AnnotationEntry] = []
    seen: set[tuple[str, str, str]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return AnnotationSet([])
        if list(reader.fieldnames) != CSV_HEADER:
            raise ValidationError(
                f"expected CSV header {','.join(CSV_HEADER)}, got {','.join(reader.fieldnames)}"
            )
        for row_no, row in enumerate(reader, start=2):
            try:
                entry = AnnotationEntry(
                    question_id=row["question_id"],
                    team_id=row["team_id"],
                    annotator_id=row["annotator_id"],
                    coverage=int(row["coverage"]),
                    relatedness=int(row["relatedness"]),
                    quality=int(row["quality"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"row {row_no}: malformed annotation ({exc})") from exc
            _validate_likert(entry)
            key = (entry.question_id, entry.team_id, entry.annotator_id)
            if key in seen:
                raise ValidationError(f"row {row_no}: duplicate annotation for {key}")
            seen.add(key)
            entries.append(entry)
    return AnnotationSet(entries)


def write_annotations(annotations: AnnotationSet, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for e in annotations.entries:
            writer.writerow([e.question_id, e.team_id, e.annotator_id,
                             e.coverage, e.relatedness, e.quality])


def _averaged_scores(annotations: AnnotationSet) -> dict[tuple[str, str], dict[str, float]]:
    """Mean per (question, team, metric) across annotators."""
    sums: dict[tuple[str, str], dict[str, float]] = {}
    counts: dict[tuple[str, str], int] = {}
    for e in annotations.entries:
        key = (e.question_id, e.team_id)
        bucket = sums.setdefault(key, {m: 0.0 for m in METRICS})
        for metric in METRICS:
            bucket[metric] += getattr(e, metric)
        counts[key] = counts.get(key, 0) + 1
    return {
        key: {m: total[m] / counts[key] for m in METRICS}
        for key, total in sums.items()
    }


def _borda_points(scores: Sequence[float]) -> list[float]:
    """Points for one ranking: top gets T-1, bottom 0, ties share the mean."""
    T = len(scores)
    order = sorted(range(T), key=lambda i: -scores[i])
    points = [0.0] * T
    i = 0
    while i < T:
        j = i
        while j + 1 < T and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        tied_points = sum(T - 1 - p for p in range(i, j + 1)) / (j - i + 1)
        for pos in range(i, j + 1):
            points[order[pos]] = tied_points
        i = j + 1
    return points


def borda_aggregate(
    annotations: AnnotationSet, teams: Sequence[str] | None = None
) -> dict[str, dict[str, float]]:
    """Rank teams per question per metric, award Borda points, average over questions.

    Every team must have annotations for every annotated question. Reported
    per team: borda plus the per-metric means.
    """
    averaged = _averaged_scores(annotations)
    questions = sorted({q for q, _ in averaged})
    if teams is None:
        teams = sorted({t for _, t in averaged})
    teams = list(teams)
    if not questions or not teams:
        return {}
    for q in questions:
        for t in teams:
            if (q, t) not in averaged:
                raise ValidationError(f"team {t!r} has no annotation for question {q!r}")

    borda_total = {t: 0.0 for t in teams}
    metric_total = {t: {m: 0.0 for m in METRICS} for t in teams}
    for q in questions:
        for metric in METRICS:
            scores = [averaged[(q, t)][metric] for t in teams]
            for t, pts in zip(teams, _borda_points(scores)):
                borda_total[t] += pts
        for t in teams:
            for metric in METRICS:
                metric_total[t][metric] += averaged[(q, t)][metric]

    n = len(questions)
    return {
        t: {
            "borda": borda_total[t] / n,
            "coverage_mean": metric_total[t]["coverage"] / n,
            "relatedness_mean": metric_total[t]["relatedness"] / n,
            "quality_mean": metric_total[t]["quality"] / n,
        }
        for t in teams
    }


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(x) != len(y):
        raise ValidationError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValidationError("need at least two points")
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    sxx = sum(a * a for a in dx)
    syy = sum(b * b for b in dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValidationError("correlation undefined: zero variance")
    r = sum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def write_borda_report(report: dict[str, dict[str, float]], path: str | Path) -> None:
    payload = {
        "teams": [
            {"team_id": team, **{k: round(v, 6) for k, v in row.items()}}
            for team, row in sorted(report.items(), key=lambda kv: -kv[1]["borda"])
        ]
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_borda_report(path: str | Path) -> dict[str, dict[str, float]]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return {
        row["team_id"]: {k: v for k, v in row.items() if k != "team_id"}
        for row in payload["teams"]
    }


def correlate(
    manual: dict[str, dict[str, float]], llm_correctness: dict[str, float]
) -> dict[str, float]:
    """Pearson between each manual metric and the LLM correctness, matched by team."""
    teams = sorted(manual)
    if set(teams) != set(llm_correctness):
        missing = set(teams) ^ set(llm_correctness)
        raise ValidationError(f"team sets differ between reports: {sorted(missing)}")
    llm = [llm_correctness[t] for t in teams]
    columns = {
        "borda": "borda",
        "coverage": "coverage_mean",
        "quality": "quality_mean",
        "relatedness": "relatedness_mean",
    }
    return {
        name: pearson([manual[t][column] for t in teams], llm)
        for name, column in columns.items()
    }
