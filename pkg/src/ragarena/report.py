"""Figure rendering for judge, Borda, correlation, and leaderboard outputs.

Every reporting command writes its machine-readable output first and then a
PNG next to it; these helpers own the PNG half. Figures are rendered with the
Agg backend so they work headless.
"""
from collections.abc import Mapping, Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .judge import QuestionScore
from .manual_eval import pearson

_BAR_COLOR = "#4878a8"
_ACCENT_COLOR = "#c44e52"


def _finish(fig: plt.Figure, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_judge_figure(scores: Sequence[QuestionScore], path: str | Path) -> Path:
    """Histogram the per-question correctness and faithfulness distributions."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    correctness = [s.correctness for s in scores]
    faithfulness = [s.faithfulness for s in scores]
    ax1.hist(correctness, bins=20, range=(-1.0, 2.0), color=_BAR_COLOR)
    ax1.set_xlabel("correctness")
    ax1.set_ylabel("questions")
    ax2.hist(faithfulness, bins=20, range=(-1.0, 1.0), color=_BAR_COLOR)
    ax2.set_xlabel("faithfulness")
    n_abstained = sum(1 for s in scores if s.abstained)
    fig.suptitle(f"{len(scores)} questions, {n_abstained} abstained")
    return _finish(fig, path)


def render_borda_figure(report: Mapping[str, Mapping[str, float]], path: str | Path) -> Path:
    """Horizontal bars of Borda score per team, best at the top."""
    teams = sorted(report, key=lambda t: -report[t]["borda"])
    values = [report[t]["borda"] for t in teams]
    fig, ax = plt.subplots(figsize=(7, 0.4 * len(teams) + 1.2))
    ypos = range(len(teams))
    ax.barh(ypos, values, color=_BAR_COLOR)
    ax.set_yticks(ypos, teams)
    ax.invert_yaxis()
    ax.set_xlabel("Borda score")
    return _finish(fig, path)


def render_correlation_figure(
    manual: Mapping[str, Mapping[str, float]],
    llm_correctness: Mapping[str, float],
    path: str | Path,
) -> Path:
    """Scatter each manual metric against LLM correctness, one panel per metric."""
    teams = sorted(manual)
    llm = [llm_correctness[t] for t in teams]
    panels = [
        ("borda", "Borda score"),
        ("coverage_mean", "coverage"),
        ("quality_mean", "quality"),
        ("relatedness_mean", "relatedness"),
    ]
    fig, axes = plt.subplots(2, 2, figsize=(8, 7))
    for ax, (column, label) in zip(axes.flat, panels):
        xs = [manual[t][column] for t in teams]
        ax.scatter(xs, llm, color=_BAR_COLOR)
        ax.set_xlabel(label)
        ax.set_ylabel("LLM correctness")
        ax.set_title(f"r = {pearson(xs, llm):.4f}")
    return _finish(fig, path)


def render_leaderboard_figure(rows: Sequence[Mapping[str, object]], path: str | Path) -> Path:
    """Bars of correctness per team in leaderboard order, faithfulness as markers."""
    teams = [str(r["team_id"]) for r in rows]
    correctness = [float(r["correctness"]) for r in rows]
    faithfulness = [float(r["faithfulness"]) for r in rows]
    fig, ax = plt.subplots(figsize=(7, 0.4 * len(teams) + 1.2))
    ypos = range(len(teams))
    ax.barh(ypos, correctness, color=_BAR_COLOR, label="correctness")
    ax.plot(faithfulness, ypos, "o", color=_ACCENT_COLOR, label="faithfulness")
    ax.set_yticks(ypos, teams)
    ax.invert_yaxis()
    ax.set_xlabel("score")
    ax.legend(loc="lower right")
    return _finish(fig, path)
