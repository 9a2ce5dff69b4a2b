"""Command line entry points for the whole stack.

Reporting commands (`judge`, `borda`, `correlate`, `session leaderboard`)
write a PNG figure next to their machine-readable output unless --no-figure
is given.
"""
import json
import logging
import time
from pathlib import Path

import click

from .benchgen import (
    StubGenerationClient,
    default_config,
    generate_benchmark,
    load_config,
    read_benchmark,
    write_benchmark,
)
from .corpus import chunk_corpus, load_corpus, read_chunks, write_chunks
from .dense import DenseIndex, DensePolicy, HashEmbedder, HTTPEmbedder, embed
from .errors import RagArenaError
from .judge import (
    HTTPJudgeBackend,
    JudgeConfig,
    MockJudgeBackend,
    evaluate_submission,
)
from .jsonl import read_jsonl, write_jsonl
from .manual_eval import (
    borda_aggregate,
    correlate as correlate_scores,
    ingest_annotations,
    read_borda_report,
    write_borda_report,
)
from .orchestrator import Orchestrator
from .pipeline import (
    EchoClient,
    HTTPGenerationClient,
    PipelineConfig,
    answer_batch,
    read_answers,
    write_answers,
)
from .retrieval import RetrievalConfig, retrieve
from .service import load_service_config
from .sparse import build_sparse, load_sparse, save_sparse, search_sparse

log = logging.getLogger(__name__)


def _fail(exc: Exception) -> None:
    raise click.ClickException(str(exc))


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


# ---- corpus ----

@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--max-tokens", default=512, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def ingest(corpus: str, max_tokens: int, out: str) -> None:
    """Chunk a JSONL corpus into retrieval units."""
    try:
        docs = load_corpus(corpus)
        chunks = chunk_corpus(docs, max_tokens=max_tokens)
        n = write_chunks(out, chunks)
    except RagArenaError as exc:
        _fail(exc)
    click.echo(f"{len(docs)} documents -> {n} chunks -> {out}")


# ---- indexing ----

@main.group()
def index() -> None:
    """Build search indices from a chunks file."""


@index.command("sparse")
@click.option("--chunks", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def index_sparse(chunks: str, out: str) -> None:
    try:
        idx = build_sparse(read_chunks(chunks))
        save_sparse(idx, out)
    except RagArenaError as exc:
        _fail(exc)
    click.echo(f"indexed {idx.N} chunks, {len(idx.postings)} terms -> {out}")


def _embedder(url: str | None, dimension: int):
    return HTTPEmbedder(url, dimension=dimension) if url else HashEmbedder(dimension)


@index.command("dense")
@click.option("--chunks", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--dimension", default=768, show_default=True)
@click.option("--embedder-url", envvar="EMBEDDER_URL", default=None)
@click.option("--level0-capacity", default=10_000, show_default=True)
@click.option("--seed", default=0, show_default=True)
def index_dense(
    chunks: str, out: str, dimension: int, embedder_url: str | None,
    level0_capacity: int, seed: int,
) -> None:
    try:
        items = read_chunks(chunks)
        policy = DensePolicy(dimension=dimension, level0_capacity=level0_capacity, seed=seed)
        dense = DenseIndex(policy)
        embedder = _embedder(embedder_url, dimension)
        started = time.monotonic()
        for i, chunk in enumerate(items, start=1):
            dense.insert(chunk.chunk_id, embed(chunk.text, embedder))
            if i % 5000 == 0:
                log.info("embedded %d/%d chunks", i, len(items))
        dense.save(out)
    except RagArenaError as exc:
        _fail(exc)
    click.echo(f"indexed {len(items)} chunks in {time.monotonic() - started:.1f}s -> {out}")


# ---- querying ----

@main.group()
def query() -> None:
    """Search an index."""


@query.command("sparse")
@click.option("--idx", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-q", "--question", "text", required=True)
@click.option("-k", default=10, show_default=True)
def query_sparse(idx: str, text: str, k: int) -> None:
    try:
        hits = search_sparse(load_sparse(idx), text, k)
    except RagArenaError as exc:
        _fail(exc)
    for chunk_id, score in hits:
        click.echo(f"{chunk_id}\t{score:.6f}")


@query.command("dense")
@click.option("--idx", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("-q", "--question", "text", required=True)
@click.option("-k", default=10, show_default=True)
@click.option("--embedder-url", envvar="EMBEDDER_URL", default=None)
def query_dense(idx: str, text: str, k: int, embedder_url: str | None) -> None:
    try:
        dense = DenseIndex.load(idx)
        embedder = _embedder(embedder_url, dense.policy.dimension)
        hits = dense.search(embed(text, embedder), k)
    except RagArenaError as exc:
        _fail(exc)
    for chunk_id, score in hits:
        click.echo(f"{chunk_id}\t{score:.6f}")


@query.command("hybrid")
@click.option("--sparse", "sparse_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dense", "dense_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("-q", "--question", "text", required=True)
@click.option("-k", default=10, show_default=True)
@click.option("--k-rrf", default=60, show_default=True)
@click.option("--k-each", default=50, show_default=True)
@click.option("--chunks", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Chunks file, to print passage text.")
@click.option("--embedder-url", envvar="EMBEDDER_URL", default=None)
def query_hybrid(
    sparse_path: str, dense_path: str, text: str, k: int, k_rrf: int,
    k_each: int, chunks: str | None, embedder_url: str | None,
) -> None:
    try:
        sparse_index = load_sparse(sparse_path)
        dense_index = DenseIndex.load(dense_path)
        embedder = _embedder(embedder_url, dense_index.policy.dimension)
        texts = {c.chunk_id: c.text for c in read_chunks(chunks)} if chunks else {}
        config = RetrievalConfig(k_each=k_each, k_final=k, k_rrf=k_rrf)
        passages = retrieve(text, sparse_index, dense_index, embedder, texts, config)
    except RagArenaError as exc:
        _fail(exc)
    for rank, p in enumerate(passages, start=1):
        s = "-" if p.sparse_rank is None else str(p.sparse_rank)
        d = "-" if p.dense_rank is None else str(p.dense_rank)
        line = f"{rank}\t{p.chunk_id}\t{p.fused_score:.6f}\tsparse={s}\tdense={d}"
        if p.text:
            line += f"\t{p.text[:80]}"
        click.echo(line)


# ---- answering ----

@main.command()
@click.option("--questions", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sparse", "sparse_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dense", "dense_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--chunks", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--workers", default=4, show_default=True)
@click.option("--k-final", default=10, show_default=True)
@click.option("--llm-url", envvar="LLM_API_URL", default=None,
              help="Generation endpoint; omitted -> deterministic echo client.")
@click.option("--llm-key", envvar="LLM_API_KEY", default="")
@click.option("--embedder-url", envvar="EMBEDDER_URL", default=None)
def answer(
    questions: str, sparse_path: str, dense_path: str, chunks: str, out: str,
    workers: int, k_final: int, llm_url: str | None, llm_key: str,
    embedder_url: str | None,
) -> None:
    """Answer a question file with the full retrieval + generation pipeline."""
    try:
        items = [(obj["id"], obj["question"]) for _, obj in read_jsonl(questions)]
        sparse_index = load_sparse(sparse_path)
        dense_index = DenseIndex.load(dense_path)
        embedder = _embedder(embedder_url, dense_index.policy.dimension)
        texts = {c.chunk_id: c.text for c in read_chunks(chunks)}
        client = HTTPGenerationClient(llm_url, api_key=llm_key) if llm_url else EchoClient()
        config = PipelineConfig(retrieval=RetrievalConfig(k_final=k_final), workers=workers)
        records, abstained = answer_batch(
            items, sparse_index, dense_index, embedder, texts, client, config
        )
        write_answers(out, records)
    except (RagArenaError, KeyError) as exc:
        _fail(exc)
    click.echo(f"{len(records)} answers, {len(abstained)} abstentions -> {out}")
    for qid in abstained:
        log.warning("abstained: %s", qid)


# ---- benchmark generation ----

@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-n", "count", default=500, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Category config JSON; omitted -> built-in default.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--llm-url", envvar="LLM_API_URL", default=None,
              help="Generation endpoint; omitted -> offline stub generator.")
@click.option("--llm-key", envvar="LLM_API_KEY", default="")
def genbench(
    corpus: str, count: int, seed: int, config_path: str | None, out: str,
    llm_url: str | None, llm_key: str,
) -> None:
    """Generate a synthetic Q&A benchmark from a corpus."""
    try:
        config = load_config(config_path) if config_path else default_config()
        docs = load_corpus(corpus)
        client = HTTPGenerationClient(llm_url, api_key=llm_key) if llm_url else StubGenerationClient()
        items = generate_benchmark(config, docs, count, client, rng_seed=seed)
        write_benchmark(out, items)
    except RagArenaError as exc:
        _fail(exc)
    click.echo(f"{len(items)} questions -> {out}")


# ---- judging ----

@main.command()
@click.option("--benchmark", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--answers", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--backend", type=click.Choice(["mock", "llm"]), default="mock", show_default=True)
@click.option("--alpha", default=0.7, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Per-question scores JSONL.")
@click.option("--report", "report_path", default=None, type=click.Path(dir_okay=False),
              help="Aggregate report JSON; default <out stem>.report.json.")
@click.option("--llm-url", envvar="LLM_API_URL", default=None)
@click.option("--llm-key", envvar="LLM_API_KEY", default="")
@click.option("--figure/--no-figure", default=True, show_default=True)
def judge(
    benchmark: str, answers: str, backend: str, alpha: float, out: str,
    report_path: str | None, llm_url: str | None, llm_key: str, figure: bool,
) -> None:
    """Score an answers file against a benchmark."""
    try:
        if backend == "llm":
            if not llm_url:
                raise click.ClickException("--backend llm needs --llm-url or LLM_API_URL")
            judge_backend = HTTPJudgeBackend(HTTPGenerationClient(llm_url, api_key=llm_key))
        else:
            judge_backend = MockJudgeBackend()
        bench = read_benchmark(benchmark)
        records = read_answers(answers)
        config = JudgeConfig(alpha=alpha)
        scores, aggregate = evaluate_submission(bench, records, judge_backend, config)
        write_jsonl(out, (
            {
                "id": s.question_id,
                "coverage": s.coverage,
                "relatedness": s.relatedness,
                "correctness": s.correctness,
                "faithfulness": s.faithfulness,
                "abstained": s.abstained,
                "flags": list(s.flags),
            }
            for s in scores
        ))
        report_file = Path(report_path) if report_path else Path(out).with_suffix(".report.json")
        report_file.write_text(json.dumps(aggregate, indent=2) + "\n", encoding="utf-8")
        if figure:
            from .report import render_judge_figure

            png = render_judge_figure(scores, Path(out).with_suffix(".png"))
            click.echo(f"figure -> {png}")
    except RagArenaError as exc:
        _fail(exc)
    click.echo(
        f"{aggregate['questions']} questions ({aggregate['abstentions']} abstained): "
        f"correctness {aggregate['correctness']:.6f}, faithfulness {aggregate['faithfulness']:.6f}"
    )
    click.echo(f"scores -> {out}; aggregate -> {report_file}")


# ---- manual evaluation ----

@main.command()
@click.option("--annotations", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--figure/--no-figure", default=True, show_default=True)
def borda(annotations: str, out: str, figure: bool) -> None:
    """Aggregate Likert annotations into per-team Borda scores."""
    try:
        report = borda_aggregate(ingest_annotations(annotations))
        write_borda_report(report, out)
        if figure:
            from .report import render_borda_figure

            png = render_borda_figure(report, Path(out).with_suffix(".png"))
            click.echo(f"figure -> {png}")
    except RagArenaError as exc:
        _fail(exc)
    for team in sorted(report, key=lambda t: -report[t]["borda"]):
        click.echo(f"{team}\t{report[team]['borda']:.6f}")
    click.echo(f"report -> {out}")


def _load_llm_scores(path: str) -> dict[str, float]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    rows = payload.get("teams") or payload.get("entries") or []
    return {row["team_id"]: float(row["correctness"]) for row in rows}


@main.command()
@click.option("--manual", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Borda report JSON.")
@click.option("--llm", "llm_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="LLM correctness JSON (teams or leaderboard entries).")
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--figure/--no-figure", default=True, show_default=True)
def correlate(manual: str, llm_path: str, out: str | None, figure: bool) -> None:
    """Pearson correlation between manual metrics and LLM correctness."""
    try:
        manual_report = read_borda_report(manual)
        llm_scores = _load_llm_scores(llm_path)
        result = correlate_scores(manual_report, llm_scores)
        for name in ("borda", "coverage", "quality", "relatedness"):
            click.echo(f"{name}\t{result[name]:.4f}")
        if out:
            Path(out).write_text(
                json.dumps({"pearson": {k: round(v, 6) for k, v in result.items()}}, indent=2) + "\n",
                encoding="utf-8",
            )
            click.echo(f"report -> {out}")
        if figure:
            from .report import render_correlation_figure

            target = Path(out).with_suffix(".png") if out else Path("correlation.png")
            png = render_correlation_figure(manual_report, llm_scores, target)
            click.echo(f"figure -> {png}")
    except (RagArenaError, KeyError) as exc:
        _fail(exc)


# ---- service ----

@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
def serve(config_path: str, host: str, port: int) -> None:
    """Run the challenge HTTP service."""
    import uvicorn

    from .service import build_app

    try:
        app = build_app(config_path)
    except RagArenaError as exc:
        _fail(exc)
    uvicorn.run(app, host=host, port=port)


def _open_orchestrator(config_path: str) -> Orchestrator:
    config = load_service_config(config_path)
    return Orchestrator(config.state_dir, teams=config.teams, duration=config.session_duration)


@main.group()
def session() -> None:
    """Administer challenge sessions against the service state directory."""


@session.command("create")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--benchmark", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--shared-seed-file", default=None, type=click.Path(exists=True, dir_okay=False),
              help="File with one shared question id per line.")
@click.option("--shared-count", default=0, show_default=True,
              help="Alternatively: first N benchmark questions become the shared seed.")
@click.option("--session-id", default=None)
@click.option("--size", default=None, type=int)
@click.option("--duration", default=None, type=float)
@click.option("--shuffle-seed", default=None, type=int)
@click.option("--questions-out", default=None, type=click.Path(dir_okay=False))
def session_create(
    config_path: str, benchmark: str, shared_seed_file: str | None, shared_count: int,
    session_id: str | None, size: int | None, duration: float | None,
    shuffle_seed: int | None, questions_out: str | None,
) -> None:
    try:
        orch = _open_orchestrator(config_path)
        bench = read_benchmark(benchmark)
        if shared_seed_file:
            shared = [
                line.strip() for line in Path(shared_seed_file).read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        else:
            shared = [qa.question_id for qa in bench[:shared_count]]
        created = orch.create_session(
            bench, shared, session_id=session_id, size=size,
            duration=duration, shuffle_seed=shuffle_seed,
        )
        if questions_out:
            write_jsonl(questions_out, orch.questions_payload(created.session_id))
    except RagArenaError as exc:
        _fail(exc)
    click.echo(
        f"{created.session_id}: {len(created.questions)} questions "
        f"({len(created.shared_seed_ids)} shared), closes at {created.end:.0f}"
    )
    if questions_out:
        click.echo(f"questions -> {questions_out}")


@session.command("close")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.argument("session_id")
def session_close(config_path: str, session_id: str) -> None:
    try:
        orch = _open_orchestrator(config_path)
        orch.close_session(session_id)
    except RagArenaError as exc:
        _fail(exc)
    click.echo(f"{session_id} closed")


@session.command("record")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--baseline-name", default=None,
              help="Record as the unranked baseline row under this name.")
@click.argument("session_id")
@click.argument("team_id")
@click.argument("report_json", type=click.Path(exists=True, dir_okay=False))
def session_record(
    config_path: str, baseline_name: str | None, session_id: str, team_id: str, report_json: str
) -> None:
    """Attach a judge aggregate report to SESSION_ID for TEAM_ID."""
    try:
        aggregate = json.loads(Path(report_json).read_text(encoding="utf-8"))
        orch = _open_orchestrator(config_path)
        if baseline_name:
            orch.record_baseline(
                session_id, baseline_name, aggregate["correctness"], aggregate["faithfulness"]
            )
        else:
            orch.record_scores(
                session_id, team_id, aggregate["correctness"], aggregate["faithfulness"]
            )
    except (RagArenaError, KeyError) as exc:
        _fail(exc)
    click.echo(f"recorded {baseline_name or team_id} in {session_id}")


@session.command("leaderboard")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--figure/--no-figure", default=True, show_default=True)
@click.argument("session_id")
def session_leaderboard(
    config_path: str, out: str | None, figure: bool, session_id: str
) -> None:
    try:
        orch = _open_orchestrator(config_path)
        entries = orch.compute_leaderboard(session_id)
        rows = [
            {
                "rank": e.rank,
                "team_id": e.team_id,
                "team_name": e.team_name,
                "correctness": round(e.correctness, 6),
                "faithfulness": round(e.faithfulness, 6),
            }
            for e in entries
        ]
        if out:
            Path(out).write_text(
                json.dumps({"session_id": session_id, "entries": rows}, indent=2) + "\n",
                encoding="utf-8",
            )
        if figure and rows:
            from .report import render_leaderboard_figure

            target = Path(out).with_suffix(".png") if out else Path(f"{session_id}-leaderboard.png")
            png = render_leaderboard_figure(rows, target)
            click.echo(f"figure -> {png}")
    except RagArenaError as exc:
        _fail(exc)
    for row in rows:
        rank = "-" if row["rank"] is None else str(row["rank"])
        click.echo(
            f"{rank:>4}  {row['team_name']:<24} {row['correctness']:>10.6f} {row['faithfulness']:>10.6f}"
        )
    if out:
        click.echo(f"report -> {out}")


if __name__ == "__main__":
    main()
