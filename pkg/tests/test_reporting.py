"""Report writers: JSON/CSV round trips and figure rendering."""

import csv
import json

from evopool.harness import run_baseline, time_f15
from evopool.objectives import TrapParams, make_f15_spec
from evopool.problems import TrapProblem
from evopool.reporting import (
    baseline_csv_rows,
    render_baseline_figure,
    render_timing_figure,
    save_csv,
    save_json,
    timing_csv_rows,
)

TRAP2 = TrapProblem(TrapParams(num_blocks=2))


def test_save_json_round_trip(tmp_path):
    path = save_json(tmp_path / "sub" / "doc.json", {"a": 1, "b": [1.5, None]})
    assert json.loads(path.read_text()) == {"a": 1, "b": [1.5, None]}


def test_save_csv_round_trip(tmp_path):
    rows = [{"x": 1, "y": "a"}, {"x": 2, "y": "b"}]
    path = save_csv(tmp_path / "rows.csv", ["x", "y"], rows)
    with open(path) as f:
        back = list(csv.DictReader(f))
    assert back == [{"x": "1", "y": "a"}, {"x": "2", "y": "b"}]


def test_baseline_rows_and_figure(tmp_path):
    reports = [
        run_baseline(TRAP2, 16, runs=3, max_evaluations=5_000, seed=1),
        run_baseline(TRAP2, 32, runs=3, max_evaluations=5_000, seed=1),
    ]
    fields, rows = baseline_csv_rows(reports)
    assert len(rows) == 6
    assert set(fields) >= {"populationSize", "run", "solved", "evaluations"}
    fig = render_baseline_figure(reports, tmp_path / "fig.png")
    assert fig.stat().st_size > 1000


def test_timing_rows_and_figure(tmp_path):
    report = time_f15(make_f15_spec(100, 10, seed=1), evaluations=40, chunks=4)
    fields, rows = timing_csv_rows(report)
    assert fields == ["chunk", "evaluations", "milliseconds"]
    assert sum(r["evaluations"] for r in rows) == 40
    fig = render_timing_figure(report, tmp_path / "timing.png")
    assert fig.stat().st_size > 1000
