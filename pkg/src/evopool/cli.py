"""Command-line entry points: serve, client, baseline, swarm, time-f15."""

from __future__ import annotations

import json
import logging
import signal
import threading
import time
from pathlib import Path

import click

from .client import ClientConfig, run_client
from .ea import IslandConfig
from .harness import (
    ChurnModel,
    SwarmScenario,
    run_baseline,
    run_swarm,
    time_f15,
)
from .objectives import make_f15_spec
from .problems import Problem, problem_from_config
from .reporting import (
    baseline_csv_rows,
    render_baseline_figure,
    render_swarm_figure,
    render_timing_figure,
    save_csv,
    save_json,
    swarm_csv_rows,
    timing_csv_rows,
)
from .server import PoolServer, PoolServerConfig


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="debug logging")
def main(verbose):
    """Pool-based distributed evolutionary computation."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def problem_options(f):
    opts = [
        click.option(
            "--problem",
            "problem_kind",
            type=click.Choice(["trap", "f15"]),
            default="trap",
            show_default=True,
        ),
        click.option("--blocks", default=40, show_default=True, help="trap: block count"),
        click.option("--block-bits", default=4, show_default=True, help="trap: bits per block"),
        click.option("--trap-a", default=1.0, show_default=True, help="trap: deceptive peak"),
        click.option("--trap-b", default=2.0, show_default=True, help="trap: global peak"),
        click.option("--trap-z", default=3, show_default=True, help="trap: unitation threshold"),
        click.option("--dim", default=1000, show_default=True, help="f15: dimension"),
        click.option("--group-size", default=50, show_default=True, help="f15: group size"),
        click.option("--problem-seed", default=1, show_default=True, help="f15: instance seed"),
        click.option("--lower", default=-5.0, show_default=True, help="f15: lower bound"),
        click.option("--upper", default=5.0, show_default=True, help="f15: upper bound"),
        click.option("--target-fitness", type=float, default=None, help="override target"),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def build_problem(kw: dict) -> Problem:
    if kw["problem_kind"] == "trap":
        cfg = {
            "kind": "trap",
            "l": kw["block_bits"],
            "a": kw["trap_a"],
            "b": kw["trap_b"],
            "z": kw["trap_z"],
            "num_blocks": kw["blocks"],
            "target_fitness": kw["target_fitness"],
        }
    else:
        cfg = {
            "kind": "f15",
            "D": kw["dim"],
            "m": kw["group_size"],
            "seed": kw["problem_seed"],
            "bounds": [kw["lower"], kw["upper"]],
            "target_fitness": kw["target_fitness"] if kw["target_fitness"] is not None else 0.0,
        }
    return problem_from_config(cfg)


def ea_options(f):
    opts = [
        click.option("--pop", "pop_fixed", type=int, default=None, help="fixed population size"),
        click.option("--pop-min", default=128, show_default=True),
        click.option("--pop-max", default=256, show_default=True),
        click.option("--migration-interval", default=100, show_default=True),
        click.option("--tournament", default=3, show_default=True),
        click.option("--crossover-rate", default=0.9, show_default=True),
        click.option("--mutation-rate", type=float, default=None, help="default: 1/length"),
        click.option(
            "--max-evaluations", default=5e6, show_default=True, help="per-island budget"
        ),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def build_island_config(kw: dict) -> IslandConfig:
    return IslandConfig(
        population_size=kw["pop_fixed"] or kw["pop_min"],
        pop_size_range=None if kw["pop_fixed"] else (kw["pop_min"], kw["pop_max"]),
        migration_interval=kw["migration_interval"],
        tournament_size=kw["tournament"],
        crossover_rate=kw["crossover_rate"],
        mutation_rate=kw["mutation_rate"],
        max_evaluations=int(kw["max_evaluations"]),
    )


def write_outputs(out, document, csv_pair, figure_renderer, no_figure):
    if out is None:
        return
    out = Path(out)
    save_json(out, document)
    fields, rows = csv_pair
    save_csv(out.with_suffix(".csv"), fields, rows)
    click.echo(f"report: {out}")
    click.echo(f"records: {out.with_suffix('.csv')}")
    if not no_figure:
        fig = figure_renderer(out.with_suffix(".png"))
        click.echo(f"figure: {fig}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--capacity", type=int, default=None)
@click.option("--log", "log_path", default=None, help="JSONL event log path")
@click.option("--verify-fitness", is_flag=True, default=None)
@click.option("--seed", type=int, default=None, help="server sampling seed")
@click.option("--web-root", default=None, help="static files directory (browser client)")
@problem_options
@click.pass_context
def serve(ctx, config_path, host, port, capacity, log_path, verify_fitness, seed, web_root, **problem_kw):
    """Run the chromosome pool server (one experiment at a time)."""
    file_cfg = {}
    if config_path:
        file_cfg = json.loads(Path(config_path).read_text())
    # problem flags override the file only when --problem was given explicitly
    explicit_problem = (
        ctx.get_parameter_source("problem_kind") == click.core.ParameterSource.COMMANDLINE
    )
    if explicit_problem or "problem" not in file_cfg:
        file_cfg["problem"] = build_problem(problem_kw).to_config()
    for key, val in [
        ("host", host),
        ("port", port),
        ("capacity", capacity),
        ("log_path", log_path),
        ("verify_fitness", verify_fitness),
        ("seed", seed),
        ("web_root", web_root),
    ]:
        if val is not None:
            file_cfg[key] = val
    file_cfg.setdefault("host", "127.0.0.1")
    file_cfg.setdefault("port", 8080)
    cfg = PoolServerConfig.from_dict(file_cfg)
    server = PoolServer(cfg).start()
    click.echo(f"pool server on {server.url} (problem: {cfg.problem.name})")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        click.echo("shutting down")
    finally:
        server.stop()


@main.command()
@click.option("--server", "server_url", default="http://127.0.0.1:8080", show_default=True)
@click.option("--islands", default=2, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--report", "report_path", default=None, help="write the JSON client report here")
@click.option("--duration", type=float, default=None, help="stop after this many seconds")
@click.option("--no-restart", is_flag=True, help="do not restart islands on solution")
@ea_options
@problem_options
def client(server_url, islands, seed, report_path, duration, no_restart, **kw):
    """Run a headless volunteer: k islands exchanging with the pool."""
    config = ClientConfig(
        server_url=server_url,
        problem=build_problem(kw),
        islands=islands,
        island_config=build_island_config(kw),
        restart_on_solution=not no_restart,
        seed=seed,
    )
    stop = threading.Event()
    for sig in (signal.SIGINT, signal.SIGTERM):
        signal.signal(sig, lambda *_: stop.set())
    if duration is not None:
        threading.Timer(duration, stop.set).start()
    report = run_client(config, stop)
    click.echo(
        f"islands: {islands}  solutions: {report.solutions_found}  "
        f"requests: {report.requests_sent}  failures: {report.request_failures}"
    )
    if report_path:
        Path(report_path).parent.mkdir(parents=True, exist_ok=True)
        Path(report_path).write_text(report.to_json() + "\n")
        click.echo(f"report: {report_path}")


@main.command()
@click.option("--pop", "pops", type=int, multiple=True, default=(512, 1024), show_default=True)
@click.option("--runs", default=50, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--out", default=None, help="report path (.json); .csv/.png land alongside")
@click.option("--no-figure", is_flag=True)
@click.option(
    "--assert",
    "assert_flag",
    is_flag=True,
    help="exit nonzero unless success rates strictly increase with population size",
)
@click.option("--tournament", default=3, show_default=True)
@click.option("--crossover-rate", default=0.9, show_default=True)
@click.option("--mutation-rate", type=float, default=None)
@click.option("--max-evaluations", default=5e6, show_default=True)
@problem_options
def baseline(pops, runs, seed, out, no_figure, assert_flag, tournament, crossover_rate,
             mutation_rate, max_evaluations, **problem_kw):
    """Single-island baseline runs for one or more population sizes.

    Population sizes share one seed list, so runs pair up across sizes.
    """
    problem = build_problem(problem_kw)
    template = IslandConfig(
        tournament_size=tournament,
        crossover_rate=crossover_rate,
        mutation_rate=mutation_rate,
    )
    reports = []
    for pop in pops:
        report = run_baseline(problem, pop, runs, int(max_evaluations), seed, template)
        reports.append(report)
        mean_t = report.mean_time_to_solution_seconds
        click.echo(
            f"pop {pop}: {report.successes}/{runs} solved "
            f"({report.success_rate:.0%}), mean time "
            f"{'n/a' if mean_t is None else f'{mean_t:.2f}s'}"
        )
    document = {"reports": [r.to_dict() for r in reports]}
    write_outputs(
        out,
        document,
        baseline_csv_rows(reports),
        lambda p: render_baseline_figure(reports, p),
        no_figure,
    )
    if assert_flag:
        rates = [r.success_rate for r in sorted(reports, key=lambda r: r.population_size)]
        if not all(a < b for a, b in zip(rates, rates[1:])):
            raise click.ClickException(f"success rates not strictly increasing: {rates}")


@main.command()
@click.option("--clients", default=2, show_default=True)
@click.option("--islands", default=2, show_default=True, help="islands per client")
@click.option("--duration", default=60.0, show_default=True)
@click.option("--solutions-target", type=int, default=1, show_default=True)
@click.option("--churn-mean-session", type=float, default=None, help="enable churn kills")
@click.option("--churn-jitter", type=float, default=0.0, show_default=True)
@click.option("--churn-rejoin", type=float, default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None)
@click.option("--no-figure", is_flag=True)
@click.option(
    "--assert",
    "assert_flag",
    is_flag=True,
    help="exit nonzero unless at least one solution arrived in time",
)
@ea_options
@problem_options
def swarm(clients, islands, duration, solutions_target, churn_mean_session, churn_jitter,
          churn_rejoin, seed, out, no_figure, assert_flag, **kw):
    """Embedded server plus a churning swarm of volunteer clients."""
    churn = None
    if churn_mean_session is not None or churn_jitter > 0:
        churn = ChurnModel(
            join_jitter=churn_jitter,
            mean_session_seconds=churn_mean_session,
            rejoin_probability=churn_rejoin,
        )
    scenario = SwarmScenario(
        problem=build_problem(kw),
        client_count=clients,
        islands_per_client=islands,
        island_config=build_island_config(kw),
        churn=churn,
        duration_limit=duration,
        solutions_target=solutions_target,
        seed=seed,
    )
    report = run_swarm(scenario)
    click.echo(
        f"solutions: {report.solutions}  first after: "
        f"{'n/a' if report.time_to_first_solution is None else f'{report.time_to_first_solution:.2f}s'}  "
        f"duration: {report.duration_seconds:.2f}s"
    )
    write_outputs(
        out,
        report.to_dict(),
        swarm_csv_rows(report),
        lambda p: render_swarm_figure(report, p),
        no_figure,
    )
    if assert_flag and report.solutions < (solutions_target or 1):
        raise click.ClickException(
            f"only {report.solutions} solutions within {duration}s"
        )


@main.command(name="time-f15")
@click.option("--dim", default=1000, show_default=True)
@click.option("--group-size", default=50, show_default=True)
@click.option("--problem-seed", default=1, show_default=True)
@click.option("--evaluations", default=10_000, show_default=True)
@click.option("--lower", default=-5.0, show_default=True)
@click.option("--upper", default=5.0, show_default=True)
@click.option("--out", default=None)
@click.option("--no-figure", is_flag=True)
@click.option("--assert", "assert_flag", is_flag=True, help="exit nonzero on a malformed report")
def time_f15_cmd(dim, group_size, problem_seed, evaluations, lower, upper, out, no_figure, assert_flag):
    """Time single-candidate benchmark evaluations (default: 10,000)."""
    spec = make_f15_spec(dim, group_size, problem_seed, bounds=(lower, upper))
    report = time_f15(spec, evaluations)
    click.echo(
        f"{report.evaluations} evaluations of D={dim}, m={group_size}: "
        f"{report.total_milliseconds:.1f} ms "
        f"({report.per_evaluation_microseconds:.1f} us each)"
    )
    click.echo(report.reference_context + " - hardware-dependent, shown for context only")
    write_outputs(
        out,
        report.to_dict(),
        timing_csv_rows(report),
        lambda p: render_timing_figure(report, p),
        no_figure,
    )
    if assert_flag and not (report.total_milliseconds > 0 and report.per_chunk):
        raise click.ClickException("timing report malformed")


if __name__ == "__main__":
    main()
