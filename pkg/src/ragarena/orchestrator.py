"""Timed challenge sessions: question issue, submission intake, leaderboards.

All state changes flow through an append-only JSONL event log under the state
directory; restarting a process replays the log, so no mutation is visible
unless it was also durable. Submission intake is serialized by a single lock
so the deadline check and the log append are atomic; reads work on snapshots.
"""
import hashlib
import json
import random
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .benchgen import QAPair, qa_from_dict, qa_to_dict
from .errors import ConfigurationError, DeadlineError, NotFoundError, ValidationError
from .jsonl import read_jsonl
from .manual_eval import AnnotationEntry, AnnotationSet, write_annotations
from .pipeline import AnswerRecord, answer_from_dict, answer_to_dict

DEFAULT_DURATION = 7200.0  # seconds


@dataclass(frozen=True)
class TeamInfo:
    team_id: str
    team_name: str
    token: str


@dataclass(frozen=True)
class Submission:
    records: tuple[AnswerRecord, ...]
    received_at: float


@dataclass
class Session:
    session_id: str
    questions: list[QAPair]
    shared_seed_ids: frozenset[str]
    start: float
    end: float
    shuffle_seed: int
    submissions: dict[str, Submission] = field(default_factory=dict)
    scores: dict[str, tuple[float, float]] = field(default_factory=dict)
    baseline: tuple[str, float, float] | None = None
    closed: bool = False

    def issued_ids(self) -> frozenset[str]:
        return frozenset(q.question_id for q in self.questions)


@dataclass(frozen=True)
class LeaderboardEntry:
    rank: int | None
    team_id: str
    team_name: str
    correctness: float
    faithfulness: float


def _answer_id(question_id: str, team_id: str) -> str:
    """Opaque id for one team's answer to one question; hides the team."""
    digest = hashlib.blake2b(f"{question_id}\x1f{team_id}".encode(), digest_size=8)
    return digest.hexdigest()


def _annotator_order(annotator_id: str, answer_id: str) -> bytes:
    return hashlib.blake2b(f"{annotator_id}\x1f{answer_id}".encode(), digest_size=8).digest()


class Orchestrator:
    def __init__(
        self,
        state_dir: str | Path,
        teams: Iterable[TeamInfo] = (),
        duration: float = DEFAULT_DURATION,
    ):
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self.teams = {t.team_id: t for t in teams}
        self.duration = duration
        self.sessions: dict[str, Session] = {}
        self.annotations = AnnotationSet([])
        self._used_question_ids: set[str] = set()
        self._lock = threading.Lock()
        self._log_path = self.state_dir / "events.jsonl"
        if self._log_path.exists():
            for _, event in read_jsonl(self._log_path):
                self._apply(event)

    # ---- event log ----

    def _commit(self, event: dict) -> None:
        """Apply an event and make it durable; apply errors leave no trace."""
        event = {"ts": time.time(), **event}
        self._apply(event)
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()

    def _apply(self, event: dict) -> None:
        kind = event["event"]
        if kind == "session_created":
            session = Session(
                session_id=event["session_id"],
                questions=[qa_from_dict(q) for q in event["questions"]],
                shared_seed_ids=frozenset(event["shared_seed_ids"]),
                start=event["start"],
                end=event["end"],
                shuffle_seed=event["shuffle_seed"],
            )
            self.sessions[session.session_id] = session
            self._used_question_ids.update(
                session.issued_ids() - session.shared_seed_ids
            )
        elif kind == "submission_accepted":
            session = self.sessions[event["session_id"]]
            session.submissions[event["team_id"]] = Submission(
                records=tuple(answer_from_dict(r) for r in event["records"]),
                received_at=event["received_at"],
            )
        elif kind == "session_closed":
            self.sessions[event["session_id"]].closed = True
        elif kind == "scores_recorded":
            session = self.sessions[event["session_id"]]
            session.scores[event["team_id"]] = (event["correctness"], event["faithfulness"])
        elif kind == "baseline_recorded":
            session = self.sessions[event["session_id"]]
            session.baseline = (event["team_name"], event["correctness"], event["faithfulness"])
        elif kind == "annotation_scored":
            self.annotations.add(AnnotationEntry(
                question_id=event["question_id"],
                team_id=event["team_id"],
                annotator_id=event["annotator_id"],
                coverage=event["coverage"],
                relatedness=event["relatedness"],
                quality=event["quality"],
            ))
        else:
            raise ValidationError(f"unknown event kind {kind!r} in log")

    # ---- sessions ----

    def _get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise NotFoundError(f"no session {session_id!r}") from None

    def create_session(
        self,
        benchmark: Sequence[QAPair],
        shared_seed_ids: Iterable[str],
        *,
        session_id: str | None = None,
        start: float | None = None,
        size: int | None = None,
        duration: float | None = None,
        shuffle_seed: int | None = None,
    ) -> Session:
        """Issue a session: shared seed plus fresh questions, shuffled.

        Non-seed questions are never reused across sessions, so the overlap
        between any two sessions is exactly the shared seed.
        """
        shared = frozenset(shared_seed_ids)
        by_id = {qa.question_id: qa for qa in benchmark}
        if len(by_id) != len(benchmark):
            raise ConfigurationError("benchmark contains duplicate question ids")
        missing = shared - set(by_id)
        if missing:
            raise ConfigurationError(
                f"shared seed ids not in benchmark: {sorted(missing)[:5]}"
            )
        with self._lock:
            if session_id is None:
                session_id = f"session-{len(self.sessions) + 1:02d}"
            if session_id in self.sessions:
                raise ConfigurationError(f"session {session_id!r} already exists")
            available = [
                qa for qa in benchmark
                if qa.question_id not in shared
                and qa.question_id not in self._used_question_ids
            ]
            needed = (size - len(shared)) if size is not None else len(available)
            if needed < 0:
                raise ConfigurationError(
                    f"session size {size} is smaller than the shared seed ({len(shared)})"
                )
            if needed > len(available):
                raise ConfigurationError(
                    f"benchmark has only {len(available)} unused questions, need {needed}"
                )
            chosen = [by_id[qid] for qid in sorted(shared)] + available[:needed]
            if shuffle_seed is None:
                shuffle_seed = secrets.randbits(32)
            random.Random(shuffle_seed).shuffle(chosen)
            if start is None:
                start = time.time()
            end = start + (self.duration if duration is None else duration)
            self._commit({
                "event": "session_created",
                "session_id": session_id,
                "questions": [qa_to_dict(qa) for qa in chosen],
                "shared_seed_ids": sorted(shared),
                "start": start,
                "end": end,
                "shuffle_seed": shuffle_seed,
            })
            return self.sessions[session_id]

    def questions_payload(self, session_id: str) -> list[dict]:
        """The issued question file content: ids and questions, nothing else."""
        session = self._get(session_id)
        return [
            {"id": qa.question_id, "question": qa.question}
            for qa in session.questions
        ]

    def close_session(self, session_id: str) -> None:
        with self._lock:
            self._get(session_id)
            self._commit({"event": "session_closed", "session_id": session_id})

    def status(self, session_id: str, now: float | None = None) -> dict:
        session = self._get(session_id)
        if now is None:
            now = time.time()
        return {
            "session_id": session.session_id,
            "start": session.start,
            "end": session.end,
            "now": now,
            "open": (not session.closed) and session.start <= now <= session.end,
            "closed": session.closed,
            "question_count": len(session.questions),
            "submission_count": len(session.submissions),
        }

    # ---- submissions ----

    def accept_submission(
        self,
        session_id: str,
        team_id: str,
        records: Sequence[AnswerRecord],
        received_at: float | None = None,
    ) -> dict:
        """Validate and store one team's answers; a valid file replaces any earlier one."""
        with self._lock:
            session = self._get(session_id)
            now = time.time() if received_at is None else received_at
            if session.closed:
                raise DeadlineError(f"session {session_id} is closed")
            if now > session.end:
                raise DeadlineError(
                    f"submission received {now - session.end:.1f}s after the window closed"
                )
            if now < session.start:
                raise DeadlineError("submission received before the window opened")
            ids = [r.question_id for r in records]
            dupes = sorted({q for q in ids if ids.count(q) > 1})
            if dupes:
                raise ValidationError(f"duplicate answers for question ids: {dupes[:5]}")
            unknown = sorted(set(ids) - session.issued_ids())
            if unknown:
                raise ValidationError(f"answers for question ids never issued: {unknown[:5]}")
            replaced = team_id in session.submissions
            self._commit({
                "event": "submission_accepted",
                "session_id": session_id,
                "team_id": team_id,
                "received_at": now,
                "records": [answer_to_dict(r) for r in records],
            })
            return {
                "accepted": True,
                "team_id": team_id,
                "answers": len(records),
                "abstentions": len(session.questions) - len(records),
                "replaced": replaced,
                "received_at": now,
            }

    # ---- leaderboard ----

    def record_scores(
        self, session_id: str, team_id: str, correctness: float, faithfulness: float
    ) -> None:
        with self._lock:
            session = self._get(session_id)
            if team_id not in session.submissions:
                raise ValidationError(
                    f"team {team_id!r} has no accepted submission in {session_id}"
                )
            self._commit({
                "event": "scores_recorded",
                "session_id": session_id,
                "team_id": team_id,
                "correctness": correctness,
                "faithfulness": faithfulness,
            })

    def record_baseline(
        self, session_id: str, team_name: str, correctness: float, faithfulness: float
    ) -> None:
        with self._lock:
            self._get(session_id)
            self._commit({
                "event": "baseline_recorded",
                "session_id": session_id,
                "team_name": team_name,
                "correctness": correctness,
                "faithfulness": faithfulness,
            })

    def compute_leaderboard(self, session_id: str) -> list[LeaderboardEntry]:
        """Ranked by correctness, ties by faithfulness then team id; baseline unranked."""
        session = self._get(session_id)
        missing = sorted(set(session.submissions) - set(session.scores))
        if missing:
            raise ValidationError(f"no judge results recorded for: {', '.join(missing)}")
        order = sorted(
            session.scores.items(), key=lambda kv: (-kv[1][0], -kv[1][1], kv[0])
        )
        entries = [
            LeaderboardEntry(
                rank=i + 1,
                team_id=team_id,
                team_name=self.teams[team_id].team_name if team_id in self.teams else team_id,
                correctness=correctness,
                faithfulness=faithfulness,
            )
            for i, (team_id, (correctness, faithfulness)) in enumerate(order)
        ]
        if session.baseline is not None:
            name, correctness, faithfulness = session.baseline
            entries.append(LeaderboardEntry(
                rank=None,
                team_id="baseline",
                team_name=name,
                correctness=correctness,
                faithfulness=faithfulness,
            ))
        return entries

    # ---- annotation ----

    def _annotation_pool(self) -> tuple[dict[str, dict], dict[str, tuple[str, str]]]:
        """Shared-seed answers to score: per question, one entry per team.

        Returns (pool, key) where pool maps question_id to question text,
        reference answer, and {answer_id: (team_id, answer text)}, and key
        resolves answer ids back to (question_id, team_id).
        """
        pool: dict[str, dict] = {}
        key: dict[str, tuple[str, str]] = {}
        for session in self.sessions.values():
            qa_by_id = {qa.question_id: qa for qa in session.questions}
            shared = sorted(session.shared_seed_ids)
            for qid in shared:
                qa = qa_by_id[qid]
                pool.setdefault(qid, {
                    "question": qa.question,
                    "reference_answer": qa.reference_answer,
                    "answers": {},
                })
            for team_id, submission in session.submissions.items():
                for rec in submission.records:
                    if rec.question_id not in session.shared_seed_ids:
                        continue
                    aid = _answer_id(rec.question_id, team_id)
                    pool[rec.question_id]["answers"][aid] = (team_id, rec.answer)
                    key[aid] = (rec.question_id, team_id)
        return pool, key

    def fetch_annotation_task(self, annotator_id: str) -> dict:
        """Next question this annotator has not finished, answers shuffled per annotator."""
        pool, _ = self._annotation_pool()
        scored = {
            (e.question_id, e.team_id)
            for e in self.annotations.entries
            if e.annotator_id == annotator_id
        }
        total = len(pool)
        completed = 0
        task: dict | None = None
        for qid in sorted(pool):
            answers = pool[qid]["answers"]
            unscored = [
                aid for aid, (team_id, _) in answers.items()
                if (qid, team_id) not in scored
            ]
            if not unscored:
                completed += 1
                continue
            if task is None:
                unscored.sort(key=lambda aid: _annotator_order(annotator_id, aid))
                task = {
                    "done": False,
                    "question_id": qid,
                    "question": pool[qid]["question"],
                    "reference_answer": pool[qid]["reference_answer"],
                    "answers": [
                        {"answer_id": aid, "answer": answers[aid][1]} for aid in unscored
                    ],
                }
        if task is None:
            return {"done": True, "completed": completed, "total": total}
        task["progress"] = {"completed": completed, "total": total}
        return task

    def post_annotation_score(
        self,
        annotator_id: str,
        answer_id: str,
        coverage: int,
        relatedness: int,
        quality: int,
    ) -> AnnotationEntry:
        _, key = self._annotation_pool()
        if answer_id not in key:
            raise NotFoundError(f"no answer {answer_id!r} awaiting annotation")
        question_id, team_id = key[answer_id]
        entry = AnnotationEntry(
            question_id=question_id,
            team_id=team_id,
            annotator_id=annotator_id,
            coverage=coverage,
            relatedness=relatedness,
            quality=quality,
        )
        with self._lock:
            self._commit({
                "event": "annotation_scored",
                "question_id": entry.question_id,
                "team_id": entry.team_id,
                "annotator_id": entry.annotator_id,
                "coverage": entry.coverage,
                "relatedness": entry.relatedness,
                "quality": entry.quality,
            })
        return entry

    def export_annotations(self, path: str | Path) -> int:
        write_annotations(self.annotations, path)
        return len(self.annotations.entries)
