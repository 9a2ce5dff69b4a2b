"""HTTP front for the orchestrator: sessions, submissions, annotation, static UI.

Teams and admins authenticate with static bearer tokens from the service
config. Team identity comes from the token, never from the request body.
"""
import hmac
import json
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .benchgen import read_benchmark
from .errors import (
    ConfigurationError,
    DeadlineError,
    NotFoundError,
    ParseError,
    ValidationError,
)
from .orchestrator import DEFAULT_DURATION, Orchestrator, TeamInfo
from .pipeline import answer_from_dict

_PACKAGED_STATIC = Path(__file__).parent / "static"


@dataclass
class ServiceConfig:
    state_dir: Path
    admin_token: str
    teams: list[TeamInfo] = field(default_factory=list)
    annotator_tokens: dict[str, str] = field(default_factory=dict)
    session_duration: float = DEFAULT_DURATION
    static_dir: Path | None = None

    def team_by_token(self, token: str) -> TeamInfo | None:
        for team in self.teams:
            if hmac.compare_digest(team.token, token):
                return team
        return None


def load_service_config(path: str | Path) -> ServiceConfig:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        teams = [
            TeamInfo(t["team_id"], t.get("team_name", t["team_id"]), t["token"])
            for t in payload.get("teams", [])
        ]
        config = ServiceConfig(
            state_dir=Path(payload["state_dir"]),
            admin_token=payload["admin_token"],
            teams=teams,
            annotator_tokens=dict(payload.get("annotator_tokens", {})),
            session_duration=float(payload.get("session_duration", DEFAULT_DURATION)),
            static_dir=Path(payload["static_dir"]) if payload.get("static_dir") else None,
        )
    except KeyError as exc:
        raise ConfigurationError(f"service config missing field {exc}") from exc
    if not config.admin_token:
        raise ConfigurationError("admin_token must be non-empty")
    seen = set()
    for team in config.teams:
        if team.team_id in seen:
            raise ConfigurationError(f"duplicate team id {team.team_id!r}")
        seen.add(team.team_id)
    return config


def _token(authorization: str | None) -> str:
    if not authorization or not authorization.startswith("Bearer "):
        raise PermissionError("missing bearer token")
    return authorization[len("Bearer "):]


def create_app(orchestrator: Orchestrator, config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="ragarena", docs_url=None, redoc_url=None)

    @app.exception_handler(NotFoundError)
    async def _nf(_req, exc):
        return JSONResponse({"detail": str(exc)}, status_code=404)

    @app.exception_handler(DeadlineError)
    async def _dl(_req, exc):
        return JSONResponse({"detail": str(exc)}, status_code=403)

    @app.exception_handler(ValidationError)
    async def _va(_req, exc):
        status = 409 if "duplicate" in str(exc) else 400
        return JSONResponse({"detail": str(exc)}, status_code=status)

    @app.exception_handler(ConfigurationError)
    async def _cf(_req, exc):
        return JSONResponse({"detail": str(exc)}, status_code=400)

    @app.exception_handler(PermissionError)
    async def _pe(_req, exc):
        return JSONResponse({"detail": str(exc)}, status_code=401)

    def require_admin(authorization: str | None) -> None:
        if not hmac.compare_digest(_token(authorization), config.admin_token):
            raise PermissionError("admin token required")

    def require_team(authorization: str | None) -> TeamInfo:
        team = config.team_by_token(_token(authorization))
        if team is None:
            raise PermissionError("unrecognized team token")
        return team

    def require_annotator(annotator_id: str, authorization: str | None) -> None:
        if not config.annotator_tokens:
            return
        expected = config.annotator_tokens.get(annotator_id)
        if expected is None or not hmac.compare_digest(_token(authorization), expected):
            raise PermissionError("unrecognized annotator token")

    @app.post("/sessions")
    async def create_session(
        payload: dict = Body(...), authorization: str | None = Header(None)
    ):
        require_admin(authorization)
        try:
            benchmark = read_benchmark(payload["benchmark_path"])
            shared = payload["shared_seed_ids"]
        except KeyError as exc:
            raise ValidationError(f"missing field {exc}") from exc
        session = orchestrator.create_session(
            benchmark,
            shared,
            session_id=payload.get("session_id"),
            start=payload.get("start"),
            size=payload.get("size"),
            duration=payload.get("duration", config.session_duration),
            shuffle_seed=payload.get("shuffle_seed"),
        )
        return orchestrator.status(session.session_id)

    @app.get("/sessions/{session_id}/questions")
    async def get_questions(session_id: str):
        lines = (
            json.dumps(row, ensure_ascii=False)
            for row in orchestrator.questions_payload(session_id)
        )
        return PlainTextResponse(
            "\n".join(lines) + "\n", media_type="application/x-ndjson"
        )

    @app.post("/sessions/{session_id}/submissions")
    async def post_submission(
        session_id: str, request: Request, authorization: str | None = Header(None)
    ):
        team = require_team(authorization)
        body = (await request.body()).decode("utf-8")
        records, errors = [], []
        for line_no, line in enumerate(body.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ParseError("not a JSON object", line_no)
                records.append(answer_from_dict(obj))
            except (json.JSONDecodeError, KeyError, TypeError, ParseError) as exc:
                errors.append({"line": line_no, "error": str(exc)})
        if errors:
            return JSONResponse(
                {"detail": "malformed answer records", "errors": errors}, status_code=400
            )
        return orchestrator.accept_submission(session_id, team.team_id, records)

    @app.get("/sessions/{session_id}/leaderboard")
    async def get_leaderboard(session_id: str):
        entries = orchestrator.compute_leaderboard(session_id)
        return {
            "session_id": session_id,
            "entries": [
                {
                    "rank": e.rank,
                    "team_id": e.team_id,
                    "team_name": e.team_name,
                    "correctness": round(e.correctness, 6),
                    "faithfulness": round(e.faithfulness, 6),
                }
                for e in entries
            ],
        }

    @app.get("/sessions/{session_id}/status")
    async def get_status(session_id: str):
        return orchestrator.status(session_id)

    @app.post("/sessions/{session_id}/scores")
    async def post_scores(
        session_id: str,
        payload: dict = Body(...),
        authorization: str | None = Header(None),
    ):
        require_admin(authorization)
        try:
            if "baseline" in payload:
                base = payload["baseline"]
                orchestrator.record_baseline(
                    session_id, base["team_name"], base["correctness"], base["faithfulness"]
                )
            else:
                orchestrator.record_scores(
                    session_id,
                    payload["team_id"],
                    payload["correctness"],
                    payload["faithfulness"],
                )
        except KeyError as exc:
            raise ValidationError(f"missing field {exc}") from exc
        return {"recorded": True}

    @app.post("/sessions/{session_id}/close")
    async def close_session(
        session_id: str, authorization: str | None = Header(None)
    ):
        require_admin(authorization)
        orchestrator.close_session(session_id)
        return orchestrator.status(session_id)

    @app.get("/annotation/tasks")
    async def annotation_tasks(
        annotator: str = Query(...), authorization: str | None = Header(None)
    ):
        require_annotator(annotator, authorization)
        return orchestrator.fetch_annotation_task(annotator)

    @app.post("/annotation/scores")
    async def annotation_scores(
        payload: dict = Body(...), authorization: str | None = Header(None)
    ):
        try:
            annotator_id = payload["annotator_id"]
            answer_id = payload["answer_id"]
            scores = {m: payload[m] for m in ("coverage", "relatedness", "quality")}
        except KeyError as exc:
            raise ValidationError(f"missing field {exc}") from exc
        require_annotator(annotator_id, authorization)
        entry = orchestrator.post_annotation_score(
            annotator_id, answer_id, scores["coverage"], scores["relatedness"], scores["quality"]
        )
        return {
            "recorded": True,
            "question_id": entry.question_id,
            "annotator_id": entry.annotator_id,
        }

    static_dir = config.static_dir or _PACKAGED_STATIC
    if static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


def build_app(config_path: str | Path) -> FastAPI:
    """Config file in, ready application out; the `serve` command calls this."""
    config = load_service_config(config_path)
    orchestrator = Orchestrator(
        config.state_dir, teams=config.teams, duration=config.session_duration
    )
    return create_app(orchestrator, config)
