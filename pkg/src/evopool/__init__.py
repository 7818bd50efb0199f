"""Pool-based distributed evolutionary computation.

Autonomous EA islands evolve locally and exchange individuals through a
central chromosome pool over HTTP. The package bundles the benchmark
objectives, the island engine, the pool server, a headless volunteer
client and an experiment harness with a CLI.
"""

from .objectives import (
    F15Spec,
    TrapParams,
    f15,
    make_f15_spec,
    rastrigin,
    rotated_rastrigin,
    trap_fitness,
)
from .problems import F15Problem, Problem, TrapProblem, problem_from_config
from .ea import (
    Individual,
    IslandConfig,
    IslandResult,
    IslandState,
    MigrationOutcome,
    Population,
    best_of,
    init_island,
    insert_migrant,
    make_rng,
    run_island,
    step_generation,
)

__version__ = "0.1.0"

__all__ = [
    "TrapParams",
    "trap_fitness",
    "rastrigin",
    "rotated_rastrigin",
    "F15Spec",
    "f15",
    "make_f15_spec",
    "TrapProblem",
    "F15Problem",
    "Problem",
    "problem_from_config",
    "Individual",
    "Population",
    "IslandConfig",
    "IslandState",
    "IslandResult",
    "MigrationOutcome",
    "make_rng",
    "init_island",
    "step_generation",
    "best_of",
    "insert_migrant",
    "run_island",
]
