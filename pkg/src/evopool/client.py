"""Headless volunteer client: k concurrent islands with pool migration.

Each island thread evolves independently and, at every migration boundary,
PUTs its best individual to the pool server and GETs a random migrant
back. Network trouble never stops evolution: failed exchanges are logged,
retried with exponential backoff, and the island keeps iterating locally.

When an island solves, it announces the winner, and (by default) the slot
is reinitialized with a fresh uuid and the next seed in its stream - the
thread itself lives on. An ack whose experiment id differs from the one
the island first recorded means the experiment moved on without us; the
island restarts into the new experiment.

Per-island randomness is derived statelessly: incarnation ``j`` of island
slot ``i`` seeds MT19937 with ``SeedSequence(seed, spawn_key=(i, j))``, so
any island's evolution can be replayed in isolation.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field

import numpy as np
import requests

from .ea import (
    Individual,
    IslandConfig,
    IslandState,
    MigrationOutcome,
    make_rng,
    run_island,
)
from .problems import Problem

__all__ = [
    "RetryPolicy",
    "ClientConfig",
    "ClientReport",
    "MigrationSession",
    "incarnation_seed",
    "run_client",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RetryPolicy:
    initial_backoff: float = 0.5
    factor: float = 2.0
    max_backoff: float = 30.0

    def __post_init__(self) -> None:
        if self.initial_backoff <= 0 or self.factor < 1 or self.max_backoff <= 0:
            raise ValueError("retry backoff parameters must be positive")

    def delay(self, consecutive_failures: int) -> float:
        return min(
            self.max_backoff,
            self.initial_backoff * self.factor ** max(0, consecutive_failures - 1),
        )


@dataclass(frozen=True)
class ClientConfig:
    server_url: str
    problem: Problem
    islands: int = 2
    island_config: IslandConfig = field(
        default_factory=lambda: IslandConfig(pop_size_range=(128, 256))
    )
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    restart_on_solution: bool = True
    seed: int = 0
    request_timeout: float = 5.0

    def __post_init__(self) -> None:
        if self.islands < 1:
            raise ValueError(f"need at least one island, got {self.islands}")


def incarnation_seed(seed: int, island_index: int, incarnation: int) -> np.random.SeedSequence:
    """Stateless per-incarnation seed stream (part of the replay contract)."""
    return np.random.SeedSequence(seed, spawn_key=(island_index, incarnation))


@dataclass
class ExchangeCounters:
    puts: int = 0
    gets: int = 0
    failures: int = 0
    skipped: int = 0
    migrants: int = 0

    def to_dict(self) -> dict:
        return {
            "puts": self.puts,
            "gets": self.gets,
            "failures": self.failures,
            "skipped": self.skipped,
            "migrants": self.migrants,
        }


class MigrationSession:
    """Migration hooks for one island incarnation.

    Implements the exchange against the pool API: PUT the island's best,
    interpret the ack (solution confirmed / experiment moved on), then GET
    one random migrant. Never raises into the island loop; failures start
    the backoff clock, and exchanges falling inside the backoff window are
    skipped without touching the network.
    """

    def __init__(self, config: ClientConfig):
        self.config = config
        self.problem = config.problem
        self.counters = ExchangeCounters()
        self.experiment_id: int | None = None
        self._consecutive_failures = 0
        self._next_attempt = 0.0
        self._session = requests.Session()

    def close(self) -> None:
        self._session.close()

    def _register_failure(self, exc: Exception) -> None:
        self.counters.failures += 1
        self._consecutive_failures += 1
        delay = self.config.retry.delay(self._consecutive_failures)
        self._next_attempt = time.monotonic() + delay
        logger.warning(
            "exchange failed (%s); retrying after %.1fs", exc.__class__.__name__, delay
        )

    def exchange(self, state: IslandState) -> MigrationOutcome:
        if time.monotonic() < self._next_attempt:
            self.counters.skipped += 1
            return MigrationOutcome()

        best = state.best_ever
        body = {
            "uuid": state.uuid,
            "genome": self.problem.encode_genome(best.genome),
            "fitness": best.fitness,
            "generation": state.generation,
        }
        try:
            resp = self._session.put(
                f"{self.config.server_url}/v1/pool",
                json=body,
                timeout=self.config.request_timeout,
            )
            resp.raise_for_status()
            ack = resp.json()
        except (requests.RequestException, ValueError) as exc:
            self._register_failure(exc)
            return MigrationOutcome()

        self.counters.puts += 1
        self._consecutive_failures = 0
        self._next_attempt = 0.0

        solved = bool(ack.get("solved"))
        ack_experiment = ack.get("experimentId")
        if self.experiment_id is None:
            self.experiment_id = ack_experiment
        elif ack_experiment != self.experiment_id:
            if solved:
                return MigrationOutcome(stop="solved")
            logger.info(
                "experiment advanced (%s -> %s); island restarts",
                self.experiment_id,
                ack_experiment,
            )
            return MigrationOutcome(stop="restart")
        if solved:
            return MigrationOutcome(stop="solved")

        try:
            resp = self._session.get(
                f"{self.config.server_url}/v1/pool/random",
                timeout=self.config.request_timeout,
            )
            if resp.status_code == 404:
                self.counters.gets += 1
                return MigrationOutcome()
            resp.raise_for_status()
            payload = resp.json()
            genome = self.problem.decode_genome(payload["genome"])
            migrant = Individual(genome, float(payload["fitness"]))
        except (requests.RequestException, ValueError, KeyError) as exc:
            self._register_failure(exc)
            return MigrationOutcome()

        self.counters.gets += 1
        self.counters.migrants += 1
        return MigrationOutcome(migrant=migrant)


@dataclass
class ClientReport:
    seed: int
    islands: int
    server_url: str
    per_island_results: list[list[dict]]
    solutions_found: int
    requests_sent: int
    request_failures: int
    wall_time_seconds: float

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "islands": self.islands,
            "serverUrl": self.server_url,
            "perIslandResults": self.per_island_results,
            "solutionsFound": self.solutions_found,
            "requestsSent": self.requests_sent,
            "requestFailures": self.request_failures,
            "wallTimeSeconds": self.wall_time_seconds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _island_task(
    slot: int,
    config: ClientConfig,
    stop: threading.Event,
    out: list[list[dict]],
) -> None:
    incarnation = 0
    while not stop.is_set():
        rng = make_rng(incarnation_seed(config.seed, slot, incarnation))
        session = MigrationSession(config)
        try:
            result = run_island(
                config.island_config,
                config.problem,
                rng,
                hooks=session,
                stop=stop.is_set,
            )
        finally:
            session.close()
        record = result.to_dict(config.problem)
        record["incarnation"] = incarnation
        record["exchange"] = session.counters.to_dict()
        out[slot].append(record)
        incarnation += 1

        if result.stop_reason == "restart":
            continue
        if result.solved and config.restart_on_solution:
            continue
        break


def run_client(config: ClientConfig, stop: threading.Event | None = None) -> ClientReport:
    """Run k islands against the pool until they finish or ``stop`` fires.

    An unreachable server is not fatal at any point: islands evolve
    locally and keep retrying. With the server down for a whole run, the
    evolution records match a pure-local run with the same seeds; only the
    failure counters differ.
    """
    stop = stop or threading.Event()
    t0 = time.perf_counter()
    per_island: list[list[dict]] = [[] for _ in range(config.islands)]
    threads = [
        threading.Thread(
            target=_island_task,
            args=(slot, config, stop, per_island),
            name=f"island-{slot}",
            daemon=True,
        )
        for slot in range(config.islands)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    solutions = sum(1 for slot in per_island for rec in slot if rec["solved"])
    sent = sum(
        rec["exchange"]["puts"] + rec["exchange"]["gets"]
        for slot in per_island
        for rec in slot
    )
    failures = sum(rec["exchange"]["failures"] for slot in per_island for rec in slot)
    return ClientReport(
        seed=config.seed,
        islands=config.islands,
        server_url=config.server_url,
        per_island_results=per_island,
        solutions_found=solutions,
        requests_sent=sent,
        request_failures=failures,
        wall_time_seconds=time.perf_counter() - t0,
    )
