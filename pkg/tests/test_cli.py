"""CLI surface: subcommands, report files, figure rendering, serve/client."""

import json
import re
import signal
import subprocess
import sys
import time

import pytest
from click.testing import CliRunner

from evopool.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


class TestTimeF15Command:
    def test_writes_json_csv_and_figure(self, runner, tmp_path):
        out = tmp_path / "timing.json"
        result = runner.invoke(
            main,
            [
                "time-f15",
                "--dim", "100",
                "--group-size", "10",
                "--evaluations", "50",
                "--out", str(out),
                "--assert",
            ],
        )
        assert result.exit_code == 0, result.output
        assert "evaluations of D=100" in result.output
        assert "935" in result.output  # historical context line
        doc = json.loads(out.read_text())
        assert doc["totalMilliseconds"] > 0
        assert out.with_suffix(".csv").read_text().startswith("chunk,")
        assert out.with_suffix(".png").stat().st_size > 0


class TestBaselineCommand:
    def test_single_pop_report(self, runner, tmp_path):
        out = tmp_path / "base.json"
        result = runner.invoke(
            main,
            [
                "baseline",
                "--problem", "trap",
                "--blocks", "2",
                "--pop", "16",
                "--runs", "3",
                "--max-evaluations", "10000",
                "--seed", "5",
                "--out", str(out),
                "--no-figure",
            ],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert len(doc["reports"]) == 1
        assert doc["reports"][0]["successes"] == 3
        csv_text = out.with_suffix(".csv").read_text()
        assert csv_text.count("\n") == 4  # header + 3 runs
        assert not out.with_suffix(".png").exists()

    def test_assert_flag_fails_without_ordering(self, runner, tmp_path):
        # both pop sizes trivially solve the 2-block trap: rates tie at 1.0
        result = runner.invoke(
            main,
            [
                "baseline",
                "--blocks", "2",
                "--pop", "16",
                "--pop", "32",
                "--runs", "2",
                "--max-evaluations", "10000",
                "--assert",
            ],
        )
        assert result.exit_code != 0
        assert "not strictly increasing" in result.output


class TestSwarmCommand:
    def test_quick_swarm_with_figure(self, runner, tmp_path):
        out = tmp_path / "swarm.json"
        result = runner.invoke(
            main,
            [
                "swarm",
                "--blocks", "4",
                "--clients", "1",
                "--islands", "2",
                "--pop-min", "16",
                "--pop-max", "32",
                "--migration-interval", "5",
                "--duration", "20",
                "--seed", "3",
                "--out", str(out),
                "--assert",
            ],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["solutions"] >= 1
        assert out.with_suffix(".png").stat().st_size > 0


class TestServeAndClientProcesses:
    def test_round_trip_through_standalone_processes(self, tmp_path):
        log_path = tmp_path / "server.jsonl"
        server = subprocess.Popen(
            [
                sys.executable, "-m", "evopool.cli", "serve",
                "--port", "0",
                "--problem", "trap",
                "--blocks", "2",
                "--log", str(log_path),
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            text=True,
        )
        try:
            line = server.stdout.readline()
            match = re.search(r"http://[\d.]+:(\d+)", line)
            assert match, f"no url in: {line!r}"
            url = match.group(0)

            report_path = tmp_path / "client.json"
            client = subprocess.run(
                [
                    sys.executable, "-m", "evopool.cli", "client",
                    "--server", url,
                    "--problem", "trap",
                    "--blocks", "2",
                    "--islands", "1",
                    "--pop", "16",
                    "--migration-interval", "5",
                    "--max-evaluations", "100000",
                    "--seed", "2",
                    "--no-restart",
                    "--report", str(report_path),
                ],
                capture_output=True,
                text=True,
                timeout=120,
            )
            assert client.returncode == 0, client.stderr
            report = json.loads(report_path.read_text())
            assert report["solutionsFound"] >= 1
            assert report["requestsSent"] >= 1
        finally:
            server.send_signal(signal.SIGINT)
            try:
                server.wait(timeout=10)
            except subprocess.TimeoutExpired:
                server.kill()
        events = [json.loads(l)["event"] for l in log_path.read_text().splitlines()]
        assert "put" in events and "solved" in events

    def test_config_file_with_flag_override(self, tmp_path):
        config = tmp_path / "server.json"
        config.write_text(
            json.dumps(
                {
                    "problem": {"kind": "trap", "num_blocks": 3},
                    "port": 1,  # overridden below
                }
            )
        )
        server = subprocess.Popen(
            [
                sys.executable, "-m", "evopool.cli", "serve",
                "--config", str(config),
                "--port", "0",
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            text=True,
        )
        try:
            line = server.stdout.readline()
            match = re.search(r"http://[\d.]+:(\d+)", line)
            assert match, f"no url in: {line!r}"
            import requests

            cfg = requests.get(match.group(0) + "/v1/problem", timeout=5).json()
            assert cfg["num_blocks"] == 3
        finally:
            server.send_signal(signal.SIGINT)
            try:
                server.wait(timeout=10)
            except subprocess.TimeoutExpired:
                server.kill()
