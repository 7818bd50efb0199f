import { describe, expect, it } from "vitest";

import { DEFAULT_OPTIONS, Island, runIslandLoop } from "../src/island.js";
import {
  f15Value,
  makeTrapProblem,
  rastriginSum,
  trapFitness,
  type F15Instance,
} from "../src/problems.js";
import { mulberry32 } from "../src/rng.js";

const TRAP2 = makeTrapProblem({
  l: 4, a: 1, b: 2, z: 3, num_blocks: 2, target_fitness: null,
});

describe("trap fitness", () => {
  it("matches the frozen reference values", () => {
    const p = { l: 4, a: 1, b: 2, z: 3, num_blocks: 2, target_fitness: null };
    expect(trapFitness(Uint8Array.from([1, 1, 1, 1, 1, 1, 1, 1]), p)).toBe(4);
    expect(trapFitness(Uint8Array.from([0, 0, 0, 0, 0, 0, 0, 0]), p)).toBe(2);
    expect(trapFitness(Uint8Array.from([1, 1, 1, 0, 0, 0, 0, 0]), p)).toBe(1);
  });
});

describe("rotated group benchmark", () => {
  const identity: F15Instance = {
    D: 4,
    m: 2,
    seed: 0,
    bounds: [-5, 5],
    o: [0, 0, 0, 0],
    M: [
      [1, 0],
      [0, 1],
    ],
    P: [0, 1, 2, 3],
  };

  it("reduces to plain rastrigin under identity", () => {
    expect(f15Value(Float64Array.from([1, 1, 1, 1]), identity)).toBeCloseTo(4, 9);
    expect(f15Value(Float64Array.from([0.5, 0, 0, 0]), identity)).toBeCloseTo(20.25, 9);
    expect(rastriginSum(Float64Array.from([0, 0]))).toBe(0);
  });

  it("is zero at the shift vector", () => {
    const shifted = { ...identity, o: [1.5, -2, 0.25, 3] };
    expect(
      f15Value(Float64Array.from(shifted.o), shifted),
    ).toBeCloseTo(0, 9);
  });
});

describe("island evolution", () => {
  it("is monotone in best fitness and counts evaluations", () => {
    const island = new Island(
      TRAP2,
      { ...DEFAULT_OPTIONS, popMin: 16, popMax: 16, maxEvaluations: 1e9 },
      mulberry32(5),
    );
    let best = island.best.fitness;
    const size = 16;
    for (let g = 1; g <= 30; g += 1) {
      island.stepGeneration();
      expect(island.best.fitness).toBeGreaterThanOrEqual(best);
      best = island.best.fitness;
      expect(island.generation).toBe(g);
      expect(island.evaluations).toBe(size + g * (size - 1));
    }
  });

  it("solves the two-block trap quickly", async () => {
    const handle = runIslandLoop(
      makeTrapProblem({ l: 4, a: 1, b: 2, z: 3, num_blocks: 2, target_fitness: 4 }),
      { ...DEFAULT_OPTIONS, popMin: 16, popMax: 32, maxEvaluations: 100_000 },
      42,
      null,
      { onIteration: () => {}, onSolved: () => {} },
    );
    await expect(handle.done).resolves.toBe("solved");
  });

  it("re-scores wire fitness when a migrant arrives", () => {
    const island = new Island(
      TRAP2,
      { ...DEFAULT_OPTIONS, popMin: 4, popMax: 4 },
      mulberry32(9),
    );
    island.insertMigrant(Uint8Array.from([1, 1, 1, 1, 1, 1, 1, 1]));
    expect(island.best.fitness).toBe(4);
  });

  it("gives every incarnation its own uuid", () => {
    const opts = { ...DEFAULT_OPTIONS, popMin: 4, popMax: 4 };
    const a = new Island(TRAP2, opts, mulberry32(1));
    const b = new Island(TRAP2, opts, mulberry32(1));
    expect(a.uuid).not.toBe(b.uuid);
  });

  it("stops cooperatively", async () => {
    const handle = runIslandLoop(
      // unreachable target: the loop would run forever on its own
      makeTrapProblem({ l: 4, a: 1, b: 2, z: 3, num_blocks: 2, target_fitness: 999 }),
      { ...DEFAULT_OPTIONS, popMin: 8, popMax: 8 },
      3,
      null,
      { onIteration: () => {}, onSolved: () => {} },
    );
    setTimeout(() => handle.stop(), 50);
    await expect(handle.done).resolves.toBe("stopped");
  });
});
