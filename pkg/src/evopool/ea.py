"""Generational EA island engine.

One island owns a population and evolves it with tournament selection,
crossover, per-gene mutation and single-individual elitism. The engine is
representation-agnostic: bitstrings get two-point crossover and bit flips,
real vectors get per-gene arithmetic blends and bounded Gaussian noise.

Migration is injected through a hooks object invoked every
``migration_interval`` generations and once on solution; hook failures are
logged and the island keeps evolving locally. All randomness flows through
one seeded MT19937 generator per island with a fixed draw order, so equal
seeds and equal migrant sequences reproduce identical evolution records
(wall time and the incarnation uuid are the only non-reproducible fields).
"""

from __future__ import annotations

import logging
import time
import uuid as uuid_mod
from dataclasses import dataclass, replace
from typing import Callable, Optional, Protocol

import numpy as np

from .problems import Problem

__all__ = [
    "Individual",
    "Population",
    "IslandConfig",
    "IslandState",
    "IslandResult",
    "MigrationOutcome",
    "MigrationHooks",
    "make_rng",
    "init_island",
    "step_generation",
    "best_of",
    "insert_migrant",
    "run_island",
]

logger = logging.getLogger(__name__)


def make_rng(seed) -> np.random.Generator:
    """Seeded MT19937 stream; accepts an int or a ``SeedSequence``."""
    return np.random.Generator(np.random.MT19937(seed))


@dataclass
class Individual:
    genome: np.ndarray
    fitness: float | None = None


@dataclass
class Population:
    members: list[Individual]

    def __post_init__(self) -> None:
        if len(self.members) < 2:
            raise ValueError(f"population needs at least 2 members, got {len(self.members)}")

    def __len__(self) -> int:
        return len(self.members)

    def fitness_array(self) -> np.ndarray:
        fits = np.empty(len(self.members))
        for i, ind in enumerate(self.members):
            if ind.fitness is None:
                raise ValueError(f"member {i} has no fitness")
            fits[i] = ind.fitness
        return fits

    def genome_matrix(self) -> np.ndarray:
        return np.stack([ind.genome for ind in self.members])


@dataclass(frozen=True)
class IslandConfig:
    """Per-island EA parameters.

    ``direction`` and ``target_fitness`` default to the problem's own;
    ``mutation_rate`` of None means one expected flip per genome
    (1/length). When ``pop_size_range`` is set, the actual size is drawn
    uniformly from the inclusive range at island start.
    """

    population_size: int = 128
    migration_interval: int = 100
    # tournament of 3: calibrated so small populations show the documented
    # deceptive-trap failure mode while large ones stay reliable
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float | None = None
    max_evaluations: int = 5_000_000
    target_fitness: float | None = None
    direction: str | None = None
    pop_size_range: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.tournament_size < 2:
            raise ValueError(f"tournament size must be >= 2, got {self.tournament_size}")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError(f"crossover rate must be in [0, 1], got {self.crossover_rate}")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError(f"mutation rate must be in [0, 1], got {self.mutation_rate}")
        if self.direction not in (None, "maximize", "minimize"):
            raise ValueError(f"unknown direction: {self.direction!r}")
        if self.pop_size_range is not None:
            lo, hi = self.pop_size_range
            if not 2 <= lo <= hi:
                raise ValueError(f"invalid population size range ({lo}, {hi})")

    def resolve(self, problem: Problem) -> "IslandConfig":
        """Fill direction/target/mutation-rate defaults from the problem."""
        updates = {}
        if self.direction is None:
            updates["direction"] = problem.direction
        if self.target_fitness is None and problem.target_fitness is not None:
            updates["target_fitness"] = problem.target_fitness
        if self.mutation_rate is None:
            updates["mutation_rate"] = 1.0 / problem.genome_length
        if not updates:
            return self
        return replace(self, **updates)


@dataclass
class IslandState:
    uuid: str
    population: Population
    best_ever: Individual
    generation: int = 0
    evaluations: int = 0


@dataclass
class IslandResult:
    """Outcome of one island incarnation.

    ``records`` lists (generation, evaluations, best_fitness) at start and
    on every improvement; it is the reproducible trace that seeded
    differential tests compare. ``stop_reason`` is one of "solved",
    "budget", "stopped" or "restart".
    """

    uuid: str
    solved: bool
    best_fitness: float
    best_genome: np.ndarray
    generations: int
    evaluations: int
    wall_time_seconds: float
    stop_reason: str
    records: list[tuple[int, int, float]]
    migrants_received: int = 0

    def to_dict(self, problem: Problem | None = None) -> dict:
        genome = (
            problem.encode_genome(self.best_genome)
            if problem is not None
            else self.best_genome.tolist()
        )
        return {
            "uuid": self.uuid,
            "solved": self.solved,
            "best_fitness": self.best_fitness,
            "best_genome": genome,
            "generations": self.generations,
            "evaluations": self.evaluations,
            "wall_time_seconds": self.wall_time_seconds,
            "stop_reason": self.stop_reason,
            "migrants_received": self.migrants_received,
            "records": [list(r) for r in self.records],
        }


@dataclass
class MigrationOutcome:
    """What a migration exchange produced for the island loop."""

    migrant: Individual | None = None
    stop: str | None = None  # "solved" or "restart"


class MigrationHooks(Protocol):
    def exchange(self, state: IslandState) -> MigrationOutcome: ...


def _is_better(a: float, b: float, direction: str) -> bool:
    return a > b if direction == "maximize" else a < b


def _meets_target(fitness: float, target: float | None, direction: str) -> bool:
    if target is None:
        return False
    return fitness >= target if direction == "maximize" else fitness <= target


def best_of(pop: Population, direction: str) -> Individual:
    """Member with the extremal fitness; ties go to the lowest index."""
    fits = pop.fitness_array()
    idx = int(np.argmax(fits) if direction == "maximize" else np.argmin(fits))
    return pop.members[idx]


def insert_migrant(pop: Population, migrant: Individual, direction: str) -> Population:
    """Unconditionally replace the current worst member with the migrant."""
    if migrant.genome.shape != pop.members[0].genome.shape:
        raise ValueError(
            f"migrant genome length {migrant.genome.shape} does not match "
            f"population {pop.members[0].genome.shape}"
        )
    fits = pop.fitness_array()
    worst = int(np.argmin(fits) if direction == "maximize" else np.argmax(fits))
    pop.members[worst] = migrant
    return pop


def init_island(config: IslandConfig, problem: Problem, rng: np.random.Generator) -> IslandState:
    """Fresh island: uniform-random evaluated population and a new uuid.

    Draw order: the optional population size (one integer from the
    inclusive range), then the whole genome matrix in one call.
    """
    config = config.resolve(problem)
    n = config.population_size
    if config.pop_size_range is not None:
        lo, hi = config.pop_size_range
        n = int(rng.integers(lo, hi + 1))
    if config.tournament_size > n:
        raise ValueError(
            f"tournament size {config.tournament_size} exceeds population size {n}"
        )
    genomes = problem.random_genomes(rng, n)
    fits = problem.evaluate_batch(genomes)
    members = [Individual(genomes[i], float(fits[i])) for i in range(n)]
    pop = Population(members)
    best = best_of(pop, config.direction)
    return IslandState(
        uuid=str(uuid_mod.uuid4()),
        population=pop,
        best_ever=Individual(best.genome.copy(), best.fitness),
        evaluations=n,
    )


def _make_offspring_bits(
    p1: np.ndarray, p2: np.ndarray, cross: np.ndarray, rate: float, rng: np.random.Generator
) -> np.ndarray:
    pairs, length = p1.shape
    cuts = np.sort(rng.integers(1, length, size=(pairs, 2)), axis=1)
    pos = np.arange(length)
    seg = (pos >= cuts[:, :1]) & (pos < cuts[:, 1:]) & cross[:, None]
    children = np.empty((2 * pairs, length), dtype=p1.dtype)
    children[0::2] = np.where(seg, p2, p1)
    children[1::2] = np.where(seg, p1, p2)
    if rate > 0.0:
        flips = rng.random((2 * pairs, length)) < rate
        children ^= flips.astype(children.dtype)
    return children


def _make_offspring_real(
    p1: np.ndarray,
    p2: np.ndarray,
    cross: np.ndarray,
    rate: float,
    bounds: tuple[float, float],
    rng: np.random.Generator,
) -> np.ndarray:
    pairs, length = p1.shape
    alpha = rng.random((pairs, length))
    blend1 = alpha * p1 + (1.0 - alpha) * p2
    blend2 = alpha * p2 + (1.0 - alpha) * p1
    children = np.empty((2 * pairs, length), dtype=np.float64)
    children[0::2] = np.where(cross[:, None], blend1, p1)
    children[1::2] = np.where(cross[:, None], blend2, p2)
    if rate > 0.0:
        lo, hi = bounds
        sigma = 0.05 * (hi - lo)
        mask = rng.random((2 * pairs, length)) < rate
        noise = rng.standard_normal((2 * pairs, length)) * sigma
        children = np.clip(children + noise * mask, lo, hi)
    return children


def step_generation(
    state: IslandState,
    config: IslandConfig,
    problem: Problem,
    rng: np.random.Generator,
) -> IslandState:
    """One generational cycle; mutates and returns ``state``.

    The elite (current best member) survives in slot 0; the other n-1
    slots are filled by offspring from tournament selection, crossover and
    mutation. Draw order per generation is fixed regardless of coin
    outcomes: tournament index matrix, crossover coins, then the
    representation's crossover draws, mutation mask (skipped entirely when
    the rate is 0) and, for reals, the noise matrix. Offspring of the last
    pair beyond n-1 is discarded after the draws.
    """
    config = config.resolve(problem)
    pop = state.population
    n = len(pop)
    n_off = n - 1
    pairs = (n_off + 1) // 2
    fits = pop.fitness_array()
    genomes = pop.genome_matrix()

    idx = rng.integers(0, n, size=(2 * pairs, config.tournament_size))
    contest = fits[idx]
    pick = np.argmax(contest, axis=1) if config.direction == "maximize" else np.argmin(contest, axis=1)
    parents = idx[np.arange(2 * pairs), pick]
    p1 = genomes[parents[0::2]]
    p2 = genomes[parents[1::2]]
    cross = rng.random(pairs) < config.crossover_rate

    if problem.kind == "bits":
        children = _make_offspring_bits(p1, p2, cross, config.mutation_rate, rng)
    else:
        children = _make_offspring_real(
            p1, p2, cross, config.mutation_rate, problem.bounds, rng
        )
    children = children[:n_off]
    child_fits = problem.evaluate_batch(children)

    elite = best_of(pop, config.direction)
    members = [Individual(elite.genome, elite.fitness)]
    members.extend(
        Individual(children[i], float(child_fits[i])) for i in range(n_off)
    )
    state.population = Population(members)

    gen_best = best_of(state.population, config.direction)
    if _is_better(gen_best.fitness, state.best_ever.fitness, config.direction):
        state.best_ever = Individual(gen_best.genome.copy(), gen_best.fitness)
    state.generation += 1
    state.evaluations += n_off
    return state


def run_island(
    config: IslandConfig,
    problem: Problem,
    rng: np.random.Generator,
    hooks: Optional[MigrationHooks] = None,
    stop: Optional[Callable[[], bool]] = None,
) -> IslandResult:
    """Evolve one island incarnation to termination.

    Every ``migration_interval`` generations the hooks (when present) are
    asked to exchange: the outcome may carry a migrant, which is re-scored
    locally (one counted evaluation, wire fitness is advisory) and then
    replaces the worst member; it may also signal "solved" (another ack
    confirmed this island's chromosome ended the experiment) or "restart"
    (the experiment moved on, the caller should reinitialize). A final
    exchange announces a locally found solution. Hook exceptions are
    logged and evolution continues; the island never needs the exchange to
    make progress.
    """
    config = config.resolve(problem)
    t0 = time.perf_counter()
    state = init_island(config, problem, rng)
    records: list[tuple[int, int, float]] = [
        (0, state.evaluations, state.best_ever.fitness)
    ]
    migrants_received = 0
    solved = _meets_target(state.best_ever.fitness, config.target_fitness, config.direction)
    stop_reason = "solved" if solved else None
    announce = solved

    while stop_reason is None:
        if stop is not None and stop():
            stop_reason = "stopped"
            break
        if state.evaluations >= config.max_evaluations:
            stop_reason = "budget"
            break
        prev_best = state.best_ever.fitness
        step_generation(state, config, problem, rng)
        if state.best_ever.fitness != prev_best:
            records.append((state.generation, state.evaluations, state.best_ever.fitness))
        if _meets_target(state.best_ever.fitness, config.target_fitness, config.direction):
            solved = True
            announce = True
            stop_reason = "solved"
            break
        if (
            hooks is not None
            and config.migration_interval > 0
            and state.generation % config.migration_interval == 0
        ):
            outcome = _safe_exchange(hooks, state)
            if outcome.stop == "solved":
                solved = True
                stop_reason = "solved"
                break
            if outcome.stop == "restart":
                stop_reason = "restart"
                break
            if outcome.migrant is not None:
                migrant = Individual(
                    outcome.migrant.genome, float(problem.evaluate(outcome.migrant.genome))
                )
                state.evaluations += 1
                insert_migrant(state.population, migrant, config.direction)
                if _is_better(migrant.fitness, state.best_ever.fitness, config.direction):
                    state.best_ever = Individual(migrant.genome.copy(), migrant.fitness)
                    records.append(
                        (state.generation, state.evaluations, state.best_ever.fitness)
                    )
                migrants_received += 1

    if announce and hooks is not None:
        _safe_exchange(hooks, state)

    return IslandResult(
        uuid=state.uuid,
        solved=solved,
        best_fitness=state.best_ever.fitness,
        best_genome=state.best_ever.genome,
        generations=state.generation,
        evaluations=state.evaluations,
        wall_time_seconds=time.perf_counter() - t0,
        stop_reason=stop_reason,
        records=records,
        migrants_received=migrants_received,
    )


def _safe_exchange(hooks: MigrationHooks, state: IslandState) -> MigrationOutcome:
    try:
        return hooks.exchange(state)
    except Exception as exc:
        logger.warning("migration exchange failed, continuing locally: %s", exc)
        return MigrationOutcome()
