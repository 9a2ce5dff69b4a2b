"""End-to-end checks for the command line interface.

One module-scoped fixture runs the whole build loop (ingest, index, bench,
answer, judge) in a temp directory; individual tests then assert on each
command's output format and on the files it left behind.
"""
import csv
import json
import re
from importlib.resources import files as package_files
from pathlib import Path

import pytest
from click.testing import CliRunner

from ragarena.benchgen import write_benchmark
from ragarena.cli import main
from ragarena.corpus import read_chunks
from ragarena.manual_eval import read_borda_report
from ragarena.orchestrator import Orchestrator, TeamInfo

from helpers import make_answer, make_qa, synthetic_documents, write_corpus_file

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def run_cli(args, expect_exit=0):
    result = CliRunner().invoke(main, [str(a) for a in args])
    if result.exit_code != expect_exit:  # pragma: no cover - debugging aid
        raise AssertionError(
            f"exit {result.exit_code} for {args}:\n{result.output}\n{result.exception!r}"
        )
    return result


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    """Run the offline pipeline once; hand out the artifact paths."""
    root = tmp_path_factory.mktemp("cli")
    paths = {
        "corpus": root / "corpus.jsonl",
        "chunks": root / "chunks.jsonl",
        "sparse": root / "sparse.idx",
        "dense": root / "dense",
        "benchmark": root / "benchmark.jsonl",
        "answers": root / "answers.jsonl",
        "scores": root / "scores.jsonl",
        "report": root / "scores.report.json",
        "figure": root / "scores.png",
    }
    write_corpus_file(paths["corpus"], synthetic_documents(30, seed=5))
    outputs = {}
    outputs["ingest"] = run_cli(
        ["ingest", "--corpus", paths["corpus"], "--max-tokens", 64, "--out", paths["chunks"]]
    ).output
    outputs["index_sparse"] = run_cli(
        ["index", "sparse", "--chunks", paths["chunks"], "--out", paths["sparse"]]
    ).output
    outputs["index_dense"] = run_cli(
        ["index", "dense", "--chunks", paths["chunks"], "--out", paths["dense"],
         "--dimension", 32, "--seed", 1]
    ).output
    outputs["genbench"] = run_cli(
        ["genbench", "--corpus", paths["corpus"], "-n", 6, "--seed", 3,
         "--out", paths["benchmark"]]
    ).output
    outputs["answer"] = run_cli(
        ["answer", "--questions", paths["benchmark"], "--sparse", paths["sparse"],
         "--dense", paths["dense"], "--chunks", paths["chunks"],
         "--out", paths["answers"], "--workers", 2]
    ).output
    outputs["judge"] = run_cli(
        ["judge", "--benchmark", paths["benchmark"], "--answers", paths["answers"],
         "--out", paths["scores"]]
    ).output
    return paths, outputs


def test_ingest_reports_counts(built):
    paths, outputs = built
    assert "30 documents ->" in outputs["ingest"]
    chunks = read_chunks(paths["chunks"])
    assert len(chunks) >= 30
    assert f"-> {len(chunks)} chunks" in outputs["ingest"]


def test_index_commands_leave_artifacts(built):
    paths, outputs = built
    assert paths["sparse"].is_file()
    assert re.search(r"indexed \d+ chunks, \d+ terms", outputs["index_sparse"])
    assert paths["dense"].is_dir()
    assert "indexed" in outputs["index_dense"]


def test_query_sparse_output_format(built):
    paths, _ = built
    result = run_cli(["query", "sparse", "--idx", paths["sparse"], "-q", "volcanoes", "-k", 5])
    lines = result.output.strip().splitlines()
    assert 1 <= len(lines) <= 5
    scores = []
    for line in lines:
        chunk_id, score = line.split("\t")
        assert re.fullmatch(r"\d+\.\d{6}", score)
        assert "#" in chunk_id
        scores.append(float(score))
    assert scores == sorted(scores, reverse=True)


def test_query_dense_finds_exact_text(built):
    paths, _ = built
    chunk = read_chunks(paths["chunks"])[0]
    result = run_cli(["query", "dense", "--idx", paths["dense"], "-q", chunk.text, "-k", 3])
    top_id, top_score = result.output.strip().splitlines()[0].split("\t")
    assert top_id == chunk.chunk_id
    assert float(top_score) == pytest.approx(1.0, abs=1e-4)


def test_query_hybrid_shows_ranks_and_text(built):
    paths, _ = built
    result = run_cli(
        ["query", "hybrid", "--sparse", paths["sparse"], "--dense", paths["dense"],
         "-q", "volcanoes erupt", "-k", 4, "--chunks", paths["chunks"]]
    )
    lines = result.output.strip().splitlines()
    assert 1 <= len(lines) <= 4
    for rank, line in enumerate(lines, start=1):
        fields = line.split("\t")
        assert fields[0] == str(rank)
        assert "#" in fields[1]
        assert re.fullmatch(r"\d+\.\d{6}", fields[2])
        assert fields[3].startswith("sparse=")
        assert fields[4].startswith("dense=")
        assert len(fields) == 6 and fields[5]


def test_genbench_writes_requested_count(built):
    paths, outputs = built
    assert "6 questions ->" in outputs["genbench"]
    rows = [json.loads(line) for line in paths["benchmark"].read_text().splitlines()]
    assert len(rows) == 6
    for row in rows:
        assert {"id", "question", "answer", "doc_ids", "combination", "persona"} <= row.keys()


def test_answer_reports_answers_and_abstentions(built):
    paths, outputs = built
    match = re.search(r"(\d+) answers, (\d+) abstentions", outputs["answer"])
    assert match is not None
    answered, abstained = int(match.group(1)), int(match.group(2))
    assert answered + abstained == 6
    rows = [json.loads(line) for line in paths["answers"].read_text().splitlines()]
    assert len(rows) == answered
    for row in rows:
        assert {"id", "answer", "passages", "final_prompt"} <= row.keys()


def test_judge_writes_scores_report_and_figure(built):
    paths, outputs = built
    rows = [json.loads(line) for line in paths["scores"].read_text().splitlines()]
    assert len(rows) == 6
    for row in rows:
        assert {"id", "coverage", "relatedness", "correctness", "faithfulness",
                "abstained", "flags"} <= row.keys()
    report = json.loads(paths["report"].read_text())
    assert report["questions"] == 6
    assert {"abstentions", "correctness", "faithfulness"} <= report.keys()
    assert paths["figure"].read_bytes()[:8] == PNG_MAGIC
    assert re.search(r"correctness -?\d+\.\d{6}", outputs["judge"])
    assert f"figure -> {paths['figure']}" in outputs["judge"]


def test_judge_no_figure_skips_png(built, tmp_path):
    paths, _ = built
    out = tmp_path / "quiet.jsonl"
    result = run_cli(
        ["judge", "--benchmark", paths["benchmark"], "--answers", paths["answers"],
         "--out", out, "--no-figure", "--report", tmp_path / "quiet-report.json"]
    )
    assert "figure ->" not in result.output
    assert not (tmp_path / "quiet.png").exists()
    assert (tmp_path / "quiet-report.json").is_file()


def test_borda_command(tmp_path):
    annotations = tmp_path / "annotations.csv"
    with open(annotations, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["question_id", "team_id", "annotator_id",
                         "coverage", "relatedness", "quality"])
        for qid in ("q1", "q2"):
            writer.writerow([qid, "alpha", "ann1", 2, 2, 2])
            writer.writerow([qid, "bravo", "ann1", 0, 1, 1])
    out = tmp_path / "borda.json"
    result = run_cli(["borda", "--annotations", annotations, "--out", out])
    lines = [line for line in result.output.splitlines() if "\t" in line]
    assert lines[0].startswith("alpha\t")
    assert lines[1].startswith("bravo\t")
    report = read_borda_report(out)
    assert set(report) == {"alpha", "bravo"}
    assert report["alpha"]["borda"] > report["bravo"]["borda"]
    assert (tmp_path / "borda.png").read_bytes()[:8] == PNG_MAGIC


def test_correlate_packaged_samples():
    data = package_files("ragarena") / "data"
    result = run_cli(
        ["correlate", "--manual", data / "sample_manual_report.json",
         "--llm", data / "sample_llm_scores.json", "--no-figure"]
    )
    got = dict(line.split("\t") for line in result.output.strip().splitlines())
    assert got == {
        "borda": "0.8826",
        "coverage": "0.8240",
        "quality": "0.8490",
        "relatedness": "0.6021",
    }


def test_correlate_report_and_figure(tmp_path):
    data = package_files("ragarena") / "data"
    out = tmp_path / "correlation.json"
    run_cli(
        ["correlate", "--manual", data / "sample_manual_report.json",
         "--llm", data / "sample_llm_scores.json", "--out", out]
    )
    payload = json.loads(out.read_text())
    assert payload["pearson"]["borda"] == pytest.approx(0.882601, abs=1e-6)
    assert (tmp_path / "correlation.png").read_bytes()[:8] == PNG_MAGIC


def _service_config(tmp_path):
    config = tmp_path / "service.json"
    config.write_text(json.dumps({
        "state_dir": str(tmp_path / "state"),
        "admin_token": "tok-admin",
        "session_duration": 600.0,
        "teams": [
            {"team_id": "alpha", "team_name": "Team Alpha", "token": "tok-a"},
            {"team_id": "beta", "team_name": "Team Beta", "token": "tok-b"},
        ],
    }))
    return config


def test_session_commands_roundtrip(tmp_path):
    config = _service_config(tmp_path)
    benchmark = tmp_path / "benchmark.jsonl"
    write_benchmark(benchmark, [make_qa(i) for i in range(10)])
    questions_out = tmp_path / "issued.jsonl"

    created = run_cli(
        ["session", "create", "--config", config, "--benchmark", benchmark,
         "--shared-count", 2, "--session-id", "cli-1", "--size", 6,
         "--shuffle-seed", 3, "--questions-out", questions_out]
    )
    assert "cli-1: 6 questions (2 shared)" in created.output
    issued = [json.loads(line) for line in questions_out.read_text().splitlines()]
    assert len(issued) == 6
    assert all(set(row) == {"id", "question"} for row in issued)

    # submissions arrive through the service; emulate two teams against the
    # same state directory, then attach judge aggregates via the CLI
    orch = Orchestrator(
        tmp_path / "state",
        teams=[TeamInfo("alpha", "Team Alpha", "tok-a"),
               TeamInfo("beta", "Team Beta", "tok-b")],
        duration=600.0,
    )
    records = [make_answer(row["id"], f"answer for {row['id']}") for row in issued]
    orch.accept_submission("cli-1", "alpha", records)
    orch.accept_submission("cli-1", "beta", records)

    for team, correctness in (("alpha", 1.25), ("beta", 1.75)):
        report = tmp_path / f"{team}.report.json"
        report.write_text(json.dumps(
            {"questions": 6, "abstentions": 0, "correctness": correctness, "faithfulness": 0.5}
        ))
        recorded = run_cli(["session", "record", "--config", config, "cli-1", team, report])
        assert f"recorded {team} in cli-1" in recorded.output

    baseline = tmp_path / "baseline.report.json"
    baseline.write_text(json.dumps({"correctness": 0.9, "faithfulness": 0.4}))
    run_cli(["session", "record", "--config", config, "--baseline-name", "plain rag",
             "cli-1", "ignored", baseline])

    lb_out = tmp_path / "leaderboard.json"
    board = run_cli(
        ["session", "leaderboard", "--config", config, "cli-1", "--out", lb_out, "--no-figure"]
    )
    payload = json.loads(lb_out.read_text())
    assert [e["team_id"] for e in payload["entries"]] == ["beta", "alpha", "baseline"]
    assert [e["rank"] for e in payload["entries"]] == [1, 2, None]
    table = [line for line in board.output.splitlines() if "Team" in line or "plain rag" in line]
    assert table[0].lstrip().startswith("1")
    assert table[-1].lstrip().startswith("-")

    closed = run_cli(["session", "close", "--config", config, "cli-1"])
    assert "cli-1 closed" in closed.output
    missing = run_cli(["session", "close", "--config", config, "no-such"], expect_exit=1)
    assert "Error" in missing.output


def test_session_record_without_submission_fails(tmp_path):
    config = _service_config(tmp_path)
    benchmark = tmp_path / "benchmark.jsonl"
    write_benchmark(benchmark, [make_qa(i) for i in range(4)])
    run_cli(["session", "create", "--config", config, "--benchmark", benchmark,
             "--shared-count", 1, "--session-id", "cli-2", "--size", 3])
    report = tmp_path / "r.json"
    report.write_text(json.dumps({"correctness": 1.0, "faithfulness": 1.0}))
    result = run_cli(["session", "record", "--config", config, "cli-2", "alpha", report],
                     expect_exit=1)
    assert "Error" in result.output


def test_cli_failures_are_reported_not_raised(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    result = run_cli(["ingest", "--corpus", bad, "--out", tmp_path / "chunks.jsonl"],
                     expect_exit=1)
    assert "Error" in result.output
    assert result.exception is None or isinstance(result.exception, SystemExit)
