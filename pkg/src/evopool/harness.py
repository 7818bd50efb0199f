"""Experiment harness: baselines, swarms with churn, and the timing probe.

Three experiment drivers share the same reporting conventions: every
report embeds the full configuration and master seed needed to reproduce
it, aggregate statistics are recomputable from the per-run records, and
comparative experiments reuse identical per-run seed lists so that
differences are attributable to the varied parameter alone.
"""

from __future__ import annotations

import platform
import threading
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .client import ClientConfig, RetryPolicy, run_client
from .ea import IslandConfig, make_rng, run_island
from .objectives import F15Spec, f15
from .problems import Problem
from .server import PoolServer, PoolServerConfig

__all__ = [
    "BaselineReport",
    "ChurnModel",
    "SwarmScenario",
    "SwarmReport",
    "TimingReport",
    "run_baseline",
    "run_swarm",
    "time_f15",
    "TIMING_REFERENCE_CONTEXT",
]

# Published 2015 figures for the same D=1000/m=50 configuration on other
# runtimes and hardware; printed as context with timing reports, never
# asserted against.
TIMING_REFERENCE_CONTEXT = (
    "reference (2015, 3.7GHz Xeon E5): Matlab 935 ms, Java 991 ms, "
    "browser worker 1238 ms per 10k evaluations"
)


def baseline_run_seed(seed: int, run_index: int) -> np.random.SeedSequence:
    """Per-run stream; independent of population size, so runs pair up."""
    return np.random.SeedSequence(seed, spawn_key=(run_index,))


@dataclass
class BaselineReport:
    problem: dict
    population_size: int
    runs: int
    successes: int
    success_rate: float
    mean_time_to_solution_seconds: float | None
    mean_evaluations: float | None
    seed: int
    max_evaluations: int
    ea: dict
    per_run_records: list[dict]

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "populationSize": self.population_size,
            "runs": self.runs,
            "successes": self.successes,
            "successRate": self.success_rate,
            "meanTimeToSolutionSeconds": self.mean_time_to_solution_seconds,
            "meanEvaluations": self.mean_evaluations,
            "seed": self.seed,
            "maxEvaluations": self.max_evaluations,
            "ea": self.ea,
            "perRunRecords": self.per_run_records,
        }


def run_baseline(
    problem: Problem,
    population_size: int,
    runs: int,
    max_evaluations: int,
    seed: int,
    config: IslandConfig | None = None,
) -> BaselineReport:
    """Independent seeded single-island runs with no migration.

    Means are computed over successful runs only, matching the convention
    of the original population-size comparison.
    """
    if runs < 1:
        raise ValueError(f"need at least one run, got {runs}")
    template = config or IslandConfig()
    island_cfg = replace(
        template,
        population_size=population_size,
        pop_size_range=None,
        max_evaluations=max_evaluations,
    )
    records = []
    for i in range(runs):
        rng = make_rng(baseline_run_seed(seed, i))
        result = run_island(island_cfg, problem, rng)
        records.append(
            {
                "run": i,
                "solved": result.solved,
                "evaluations": result.evaluations,
                "generations": result.generations,
                "wallTimeSeconds": result.wall_time_seconds,
                "bestFitness": result.best_fitness,
            }
        )
    solved = [r for r in records if r["solved"]]
    ea = {
        "tournamentSize": island_cfg.tournament_size,
        "crossoverRate": island_cfg.crossover_rate,
        "mutationRate": island_cfg.mutation_rate,
    }
    return BaselineReport(
        problem=problem.to_config(),
        population_size=population_size,
        runs=runs,
        successes=len(solved),
        success_rate=len(solved) / runs,
        mean_time_to_solution_seconds=(
            sum(r["wallTimeSeconds"] for r in solved) / len(solved) if solved else None
        ),
        mean_evaluations=(
            sum(r["evaluations"] for r in solved) / len(solved) if solved else None
        ),
        seed=seed,
        max_evaluations=max_evaluations,
        ea=ea,
        per_run_records=records,
    )


@dataclass(frozen=True)
class ChurnModel:
    """Seeded volunteer churn: jittered joins, exponential sessions."""

    join_jitter: float = 0.0
    mean_session_seconds: float | None = None
    rejoin_probability: float = 1.0

    def __post_init__(self) -> None:
        if self.join_jitter < 0:
            raise ValueError("join jitter must be >= 0")
        if self.mean_session_seconds is not None and self.mean_session_seconds <= 0:
            raise ValueError("mean session length must be positive")
        if not 0.0 <= self.rejoin_probability <= 1.0:
            raise ValueError("rejoin probability must be in [0, 1]")


@dataclass(frozen=True)
class SwarmScenario:
    problem: Problem
    client_count: int = 1
    islands_per_client: int = 2
    island_config: IslandConfig = field(
        default_factory=lambda: IslandConfig(pop_size_range=(128, 256))
    )
    churn: ChurnModel | None = None
    duration_limit: float = 60.0
    solutions_target: int | None = 1
    seed: int = 0
    poll_interval: float = 0.02
    pool_capacity: int = 2048

    def __post_init__(self) -> None:
        if self.client_count < 1:
            raise ValueError(f"need at least one client, got {self.client_count}")


@dataclass
class SwarmReport:
    scenario: dict
    solutions: int
    time_to_first_solution: float | None
    duration_seconds: float
    per_client_stats: list[list[dict]]
    server_stats: dict
    solutions_timeline: list[tuple[float, int]]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "solutions": self.solutions,
            "timeToFirstSolution": self.time_to_first_solution,
            "durationSeconds": self.duration_seconds,
            "perClientStats": self.per_client_stats,
            "serverStats": self.server_stats,
            "solutionsTimeline": [list(t) for t in self.solutions_timeline],
        }


_CHURN_KEY = 1_000_003
_CLIENT_KEY = 1_000_033
_SERVER_KEY = 1_000_037


def _client_seed(scenario_seed: int, slot: int, session: int) -> int:
    ss = np.random.SeedSequence(scenario_seed, spawn_key=(slot, session, _CLIENT_KEY))
    return int(ss.generate_state(1)[0])


class _ClientSlot:
    """One volunteer seat: joins, may be killed by churn, may rejoin.

    Client seeds and churn draws depend only on (scenario seed, slot,
    session), so slot 0 behaves identically whether the swarm has one
    client or many.
    """

    def __init__(self, index: int, scenario: SwarmScenario, server_url: str):
        self.index = index
        self.scenario = scenario
        self.server_url = server_url
        self.session = 0
        self.sessions: list[dict] = []
        self.rng = make_rng(
            np.random.SeedSequence(scenario.seed, spawn_key=(index, _CHURN_KEY))
        )
        churn = scenario.churn
        self.next_join_at = self.rng.uniform(0.0, churn.join_jitter) if churn else 0.0
        self.kill_at: float | None = None
        self.thread: threading.Thread | None = None
        self.stop_event: threading.Event | None = None
        self.holder: dict | None = None
        self.retired = False

    def maybe_start(self, now: float) -> None:
        if self.retired or self.thread is not None or now < self.next_join_at:
            return
        config = ClientConfig(
            server_url=self.server_url,
            problem=self.scenario.problem,
            islands=self.scenario.islands_per_client,
            island_config=self.scenario.island_config,
            restart_on_solution=True,
            seed=_client_seed(self.scenario.seed, self.index, self.session),
            retry=RetryPolicy(initial_backoff=0.2, max_backoff=5.0),
            request_timeout=5.0,
        )
        self.stop_event = threading.Event()
        self.holder = {"joined_at": now}
        self.thread = threading.Thread(
            target=self._work,
            args=(config, self.stop_event, self.holder),
            name=f"swarm-client-{self.index}-{self.session}",
            daemon=True,
        )
        self.thread.start()
        churn = self.scenario.churn
        if churn and churn.mean_session_seconds is not None:
            self.kill_at = now + self.rng.exponential(churn.mean_session_seconds)
        else:
            self.kill_at = None

    @staticmethod
    def _work(config, stop_event, holder) -> None:
        try:
            holder["report"] = run_client(config, stop_event)
        except Exception as exc:  # a crashed volunteer is just gone
            holder["error"] = repr(exc)

    def maybe_kill(self, now: float) -> None:
        if self.thread is None or self.kill_at is None or now < self.kill_at:
            return
        self.stop_event.set()

    def reap(self, now: float) -> None:
        """Collect a finished session and schedule the rejoin, if any."""
        if self.thread is None or self.thread.is_alive():
            return
        self.thread.join()
        killed = self.kill_at is not None and now >= self.kill_at
        self._record_session(now, killed=killed)
        self.thread = None
        self.stop_event = None
        self.session += 1
        churn = self.scenario.churn
        if killed and churn is not None:
            if self.rng.uniform() < churn.rejoin_probability:
                self.next_join_at = now + self.rng.uniform(0.0, churn.join_jitter)
            else:
                self.retired = True
        else:
            # ran to completion (budget or stop); the seat does not respawn
            self.retired = True

    def shutdown(self, now: float) -> None:
        if self.thread is None:
            return
        if self.stop_event is not None:
            self.stop_event.set()
        self.thread.join(timeout=30)
        self._record_session(now, killed=False)
        self.thread = None

    def _record_session(self, now: float, killed: bool) -> None:
        report = self.holder.get("report")
        session = {
            "client": self.index,
            "session": self.session,
            "joinedAt": self.holder.get("joined_at"),
            "endedAt": now,
            "killedByChurn": killed,
        }
        if report is not None:
            session.update(
                {
                    "solutionsFound": report.solutions_found,
                    "requestsSent": report.requests_sent,
                    "requestFailures": report.request_failures,
                    "islands": report.per_island_results,
                    "seed": report.seed,
                }
            )
        if "error" in self.holder:
            session["error"] = self.holder["error"]
        self.sessions.append(session)


def run_swarm(scenario: SwarmScenario) -> SwarmReport:
    """Launch an embedded pool server plus a churning client swarm.

    The orchestrator is one polling loop: it starts and stops client
    threads on the churn schedule, watches server stats for solutions and
    enforces the duration limit. Returns once the solution target is met,
    the limit expires, or every seat has retired.
    """
    server_seed = int(
        np.random.SeedSequence(scenario.seed, spawn_key=(_SERVER_KEY,)).generate_state(1)[0]
    )
    server = PoolServer(
        PoolServerConfig(
            problem=scenario.problem,
            capacity=scenario.pool_capacity,
            seed=server_seed,
        )
    )
    server.start()
    t0 = time.perf_counter()
    slots = [_ClientSlot(i, scenario, server.url) for i in range(scenario.client_count)]
    timeline: list[tuple[float, int]] = [(0.0, 0)]
    first_solution: float | None = None

    try:
        while True:
            now = time.perf_counter() - t0
            stats = server.service.stats()
            if stats.solutions != timeline[-1][1]:
                timeline.append((now, stats.solutions))
                if first_solution is None and stats.solutions > 0:
                    first_solution = now
            if scenario.solutions_target is not None and stats.solutions >= scenario.solutions_target:
                break
            if now >= scenario.duration_limit:
                break
            for slot in slots:
                slot.maybe_start(now)
                slot.maybe_kill(now)
                slot.reap(now)
            if all(slot.retired and slot.thread is None for slot in slots):
                break
            time.sleep(scenario.poll_interval)
    finally:
        end = time.perf_counter() - t0
        for slot in slots:
            slot.shutdown(end)
        final_stats = server.service.stats()
        server.stop()

    return SwarmReport(
        scenario={
            "problem": scenario.problem.to_config(),
            "clientCount": scenario.client_count,
            "islandsPerClient": scenario.islands_per_client,
            "durationLimit": scenario.duration_limit,
            "solutionsTarget": scenario.solutions_target,
            "seed": scenario.seed,
            "churn": (
                None
                if scenario.churn is None
                else {
                    "joinJitter": scenario.churn.join_jitter,
                    "meanSessionSeconds": scenario.churn.mean_session_seconds,
                    "rejoinProbability": scenario.churn.rejoin_probability,
                }
            ),
        },
        solutions=final_stats.solutions,
        time_to_first_solution=first_solution,
        duration_seconds=end,
        per_client_stats=[slot.sessions for slot in slots],
        server_stats=final_stats.to_wire(),
        solutions_timeline=timeline,
    )


@dataclass
class TimingReport:
    evaluations: int
    total_milliseconds: float
    per_evaluation_microseconds: float
    spec_seed: int
    dimension: int
    group_size: int
    value_checksum: float
    environment: str
    reference_context: str
    per_chunk: list[dict]

    def to_dict(self) -> dict:
        return {
            "evaluations": self.evaluations,
            "totalMilliseconds": self.total_milliseconds,
            "perEvaluationMicroseconds": self.per_evaluation_microseconds,
            "specSeed": self.spec_seed,
            "dimension": self.dimension,
            "groupSize": self.group_size,
            "valueChecksum": self.value_checksum,
            "environment": self.environment,
            "referenceContext": self.reference_context,
            "perChunk": self.per_chunk,
        }


def time_f15(spec: F15Spec, evaluations: int = 10_000, chunks: int = 20) -> TimingReport:
    """Time single-candidate evaluations on fresh seeded random vectors.

    Candidate generation happens outside the timed sections; only the
    evaluation calls are measured, with a monotonic high-resolution clock.
    Values (and their checksum) are deterministic for a given spec;
    timings of course are not.
    """
    if evaluations < 1:
        raise ValueError(f"need at least one evaluation, got {evaluations}")
    rng = make_rng(np.random.SeedSequence(spec.seed, spawn_key=(_SERVER_KEY, 7)))
    chunks = max(1, min(chunks, evaluations))
    bounds = np.linspace(0, evaluations, chunks + 1).astype(int)
    checksum = 0.0
    per_chunk = []
    total = 0.0
    for c in range(chunks):
        n = int(bounds[c + 1] - bounds[c])
        if n == 0:
            continue
        candidates = rng.uniform(spec.lower_bound, spec.upper_bound, size=(n, spec.D))
        t0 = time.perf_counter()
        for i in range(n):
            checksum += f15(candidates[i], spec)
        dt = time.perf_counter() - t0
        total += dt
        per_chunk.append({"chunk": c, "evaluations": n, "milliseconds": dt * 1000.0})
    return TimingReport(
        evaluations=evaluations,
        total_milliseconds=total * 1000.0,
        per_evaluation_microseconds=total * 1e6 / evaluations,
        spec_seed=spec.seed,
        dimension=spec.D,
        group_size=spec.m,
        value_checksum=checksum,
        environment=f"{platform.platform()} / Python {platform.python_version()} / numpy {np.__version__}",
        reference_context=TIMING_REFERENCE_CONTEXT,
        per_chunk=per_chunk,
    )
