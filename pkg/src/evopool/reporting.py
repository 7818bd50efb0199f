"""Report output: JSON documents, flat CSVs and rendered figures.

Every experiment writes one JSON document; next to it go a flat CSV of the
per-run records (the hand-off for external plotting) and, unless disabled,
a PNG figure rendered with matplotlib. matplotlib is imported lazily so
the server and client code paths never pay for it.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

__all__ = [
    "save_json",
    "save_csv",
    "baseline_csv_rows",
    "swarm_csv_rows",
    "timing_csv_rows",
    "render_baseline_figure",
    "render_swarm_figure",
    "render_timing_figure",
]


def save_json(path: str | Path, document: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    return path


def save_csv(path: str | Path, fieldnames: list[str], rows: list[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    return path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


# -- baseline -----------------------------------------------------------


def baseline_csv_rows(reports: list) -> tuple[list[str], list[dict]]:
    fields = [
        "populationSize",
        "run",
        "solved",
        "evaluations",
        "generations",
        "wallTimeSeconds",
        "bestFitness",
    ]
    rows = []
    for report in reports:
        for rec in report.per_run_records:
            rows.append({"populationSize": report.population_size, **rec})
    return fields, rows


def render_baseline_figure(reports: list, path: str | Path) -> Path:
    """Times-to-solution of successful runs, one box per population size."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    labels, data, rates = [], [], []
    for report in reports:
        times = [r["wallTimeSeconds"] for r in report.per_run_records if r["solved"]]
        labels.append(str(report.population_size))
        data.append(times if times else [float("nan")])
        rates.append(report.success_rate)
    ax.boxplot(data, tick_labels=labels)
    for i, rate in enumerate(rates):
        ax.annotate(f"{rate:.0%}", (i + 1, ax.get_ylim()[1]), ha="center", va="top")
    ax.set_xlabel("population size")
    ax.set_ylabel("time to solution [s] (successful runs)")
    ax.set_title("single-island baseline")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


# -- swarm ---------------------------------------------------------------


def swarm_csv_rows(report) -> tuple[list[str], list[dict]]:
    fields = [
        "client",
        "session",
        "joinedAt",
        "endedAt",
        "killedByChurn",
        "solutionsFound",
        "requestsSent",
        "requestFailures",
    ]
    rows = []
    for slot in report.per_client_stats:
        for session in slot:
            rows.append(session)
    return fields, rows


def render_swarm_figure(report, path: str | Path) -> Path:
    """Cumulative solutions over time with client session spans."""
    plt = _pyplot()
    fig, (top, bottom) = plt.subplots(
        2, 1, figsize=(7, 5), sharex=True, height_ratios=[2, 1]
    )
    if report.solutions_timeline:
        ts = [t for t, _ in report.solutions_timeline] + [report.duration_seconds]
        ns = [n for _, n in report.solutions_timeline] + [report.solutions_timeline[-1][1]]
        top.step(ts, ns, where="post")
    top.set_ylabel("solutions")
    top.set_title(
        f"{report.scenario['clientCount']} client(s), "
        f"first solution: {report.time_to_first_solution}"
    )
    for slot in report.per_client_stats:
        for session in slot:
            start = session.get("joinedAt") or 0.0
            end = session.get("endedAt") or report.duration_seconds
            bottom.hlines(session["client"], start, end, linewidth=4)
    bottom.set_xlabel("time [s]")
    bottom.set_ylabel("client")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


# -- timing --------------------------------------------------------------


def timing_csv_rows(report) -> tuple[list[str], list[dict]]:
    return ["chunk", "evaluations", "milliseconds"], list(report.per_chunk)


def render_timing_figure(report, path: str | Path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 3.5))
    xs = [c["chunk"] for c in report.per_chunk]
    per_eval = [
        c["milliseconds"] * 1000.0 / c["evaluations"] for c in report.per_chunk
    ]
    ax.plot(xs, per_eval, marker="o", markersize=3)
    ax.set_xlabel("chunk")
    ax.set_ylabel("microseconds per evaluation")
    ax.set_title(
        f"D={report.dimension}, m={report.group_size}: "
        f"{report.total_milliseconds:.0f} ms / {report.evaluations} evaluations"
    )
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
