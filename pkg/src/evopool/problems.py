"""Problem bundles: an objective plus everything the rest of the stack needs.

A problem couples the raw fitness function with its genome representation
(bit string or real vector), optimization direction, target fitness and the
wire codec used by the HTTP pool protocol. Swapping the optimization task
anywhere in the framework means handing over a different problem object.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .objectives import (
    F15Spec,
    TrapParams,
    f15,
    f15_batch,
    make_f15_spec,
    trap_fitness,
    trap_fitness_batch,
)

__all__ = ["TrapProblem", "F15Problem", "Problem", "problem_from_config"]


@dataclass(frozen=True)
class TrapProblem:
    """Concatenated deceptive trap over a bitstring (maximize)."""

    params: TrapParams = field(default_factory=TrapParams)
    target_fitness: float | None = None

    name = "trap"
    kind = "bits"
    direction = "maximize"

    def __post_init__(self) -> None:
        if self.target_fitness is None:
            object.__setattr__(self, "target_fitness", self.params.max_fitness)

    @property
    def genome_length(self) -> int:
        return self.params.genome_length

    def __call__(self, genome) -> float:
        return trap_fitness(genome, self.params)

    evaluate = __call__

    def evaluate_batch(self, genomes: np.ndarray) -> np.ndarray:
        return trap_fitness_batch(genomes, self.params)

    def random_genomes(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.integers(0, 2, size=(n, self.genome_length), dtype=np.uint8)

    def encode_genome(self, genome: np.ndarray) -> str:
        return "".join("1" if b else "0" for b in genome)

    def decode_genome(self, wire) -> np.ndarray:
        if not isinstance(wire, str) or len(wire) != self.genome_length:
            raise ValueError(
                f"expected a {self.genome_length}-character bit string, got {wire!r:.60}"
            )
        if set(wire) - {"0", "1"}:
            raise ValueError("bit string may contain only '0' and '1'")
        return np.frombuffer(wire.encode("ascii"), dtype=np.uint8) - ord("0")

    def to_config(self) -> dict:
        p = self.params
        return {
            "kind": "trap",
            "l": p.l,
            "a": p.a,
            "b": p.b,
            "z": p.z,
            "num_blocks": p.num_blocks,
            "target_fitness": self.target_fitness,
        }

    def describe(self) -> dict:
        return self.to_config()


@dataclass(frozen=True)
class F15Problem:
    """Group-rotated shifted Rastrigin over a real vector (minimize)."""

    spec: F15Spec
    target_fitness: float = 0.0

    name = "f15"
    kind = "real"
    direction = "minimize"

    @property
    def genome_length(self) -> int:
        return self.spec.D

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.spec.lower_bound, self.spec.upper_bound)

    def __call__(self, genome) -> float:
        return f15(genome, self.spec)

    evaluate = __call__

    def evaluate_batch(self, genomes: np.ndarray) -> np.ndarray:
        return f15_batch(genomes, self.spec)

    def random_genomes(self, rng: np.random.Generator, n: int) -> np.ndarray:
        lo, hi = self.bounds
        return rng.uniform(lo, hi, size=(n, self.genome_length))

    def encode_genome(self, genome: np.ndarray) -> list:
        return [float(v) for v in genome]

    def decode_genome(self, wire) -> np.ndarray:
        if not isinstance(wire, list) or len(wire) != self.genome_length:
            raise ValueError(f"expected a list of {self.genome_length} numbers")
        try:
            v = np.array(wire, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"genome is not numeric: {exc}") from exc
        if not np.all(np.isfinite(v)):
            raise ValueError("genome contains non-finite values")
        return v

    def to_config(self) -> dict:
        return {
            "kind": "f15",
            "D": self.spec.D,
            "m": self.spec.m,
            "seed": self.spec.seed,
            "bounds": [self.spec.lower_bound, self.spec.upper_bound],
            "target_fitness": self.target_fitness,
        }

    def describe(self) -> dict:
        """Config plus the full instance, for clients that cannot regenerate
        it from the seed (e.g. the browser page)."""
        doc = self.to_config()
        doc["instance"] = json.loads(self.spec.to_json())
        return doc


Problem = Union[TrapProblem, F15Problem]


def problem_from_config(cfg: dict) -> Problem:
    """Rebuild a problem from its config dict (the inverse of ``to_config``).

    Benchmark instances are regenerated from the stored seed, so server and
    clients agree on the exact instance without shipping matrices around.
    """
    kind = cfg.get("kind")
    if kind == "trap":
        params = TrapParams(
            l=int(cfg.get("l", 4)),
            a=float(cfg.get("a", 1.0)),
            b=float(cfg.get("b", 2.0)),
            z=int(cfg.get("z", 3)),
            num_blocks=int(cfg.get("num_blocks", 40)),
        )
        target = cfg.get("target_fitness")
        return TrapProblem(params, None if target is None else float(target))
    if kind == "f15":
        bounds = cfg.get("bounds", [-5.0, 5.0])
        spec = make_f15_spec(
            D=int(cfg.get("D", 1000)),
            m=int(cfg.get("m", 50)),
            seed=int(cfg.get("seed", 0)),
            bounds=(float(bounds[0]), float(bounds[1])),
        )
        return F15Problem(spec, float(cfg.get("target_fitness", 0.0)))
    raise ValueError(f"unknown problem kind: {kind!r}")
