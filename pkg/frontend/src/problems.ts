/**
 * Browser-side problem bundles mirroring the server's configuration.
 *
 * The trap is rebuilt from its parameters; the rotated-Rastrigin benchmark
 * cannot be regenerated from a seed here (different generator), so the
 * server ships the full instance (o, M, P) via /v1/problem.
 */

import { gaussian, randInt, type Rng } from "./rng.js";
import type { WireGenome } from "./protocol.js";

export type Genome = Uint8Array | Float64Array;
export type Direction = "maximize" | "minimize";

export interface Problem {
  kind: "bits" | "real";
  name: string;
  length: number;
  direction: Direction;
  targetFitness: number | null;
  evaluate(genome: Genome): number;
  randomGenome(rng: Rng): Genome;
  crossover(a: Genome, b: Genome, rng: Rng): [Genome, Genome];
  mutate(genome: Genome, rate: number, rng: Rng): void;
  encode(genome: Genome): WireGenome;
  decode(wire: WireGenome): Genome;
  summarize(genome: Genome): string;
}

export interface TrapConfig {
  l: number;
  a: number;
  b: number;
  z: number;
  num_blocks: number;
  target_fitness: number | null;
}

export function trapFitness(bits: Uint8Array, p: TrapConfig): number {
  let total = 0;
  for (let block = 0; block < p.num_blocks; block += 1) {
    let u = 0;
    for (let i = 0; i < p.l; i += 1) u += bits[block * p.l + i];
    total += u <= p.z ? (p.a * (p.z - u)) / p.z : (p.b * (u - p.z)) / (p.l - p.z);
  }
  return total;
}

function twoPointCrossover(a: Uint8Array, b: Uint8Array, rng: Rng): [Uint8Array, Uint8Array] {
  const n = a.length;
  let c1 = 1 + randInt(rng, n - 1);
  let c2 = 1 + randInt(rng, n - 1);
  if (c1 > c2) [c1, c2] = [c2, c1];
  const childA = a.slice();
  const childB = b.slice();
  for (let i = c1; i < c2; i += 1) {
    childA[i] = b[i];
    childB[i] = a[i];
  }
  return [childA, childB];
}

export function makeTrapProblem(cfg: TrapConfig): Problem {
  const length = cfg.l * cfg.num_blocks;
  return {
    kind: "bits",
    name: "trap",
    length,
    direction: "maximize",
    targetFitness: cfg.target_fitness ?? cfg.b * cfg.num_blocks,
    evaluate: (g) => trapFitness(g as Uint8Array, cfg),
    randomGenome: (rng) => {
      const g = new Uint8Array(length);
      for (let i = 0; i < length; i += 1) g[i] = rng() < 0.5 ? 0 : 1;
      return g;
    },
    crossover: (a, b, rng) => twoPointCrossover(a as Uint8Array, b as Uint8Array, rng),
    mutate: (g, rate, rng) => {
      const bits = g as Uint8Array;
      for (let i = 0; i < bits.length; i += 1) {
        if (rng() < rate) bits[i] ^= 1;
      }
    },
    encode: (g) => {
      let s = "";
      for (const bit of g as Uint8Array) s += bit ? "1" : "0";
      return s;
    },
    decode: (wire) => {
      if (typeof wire !== "string" || wire.length !== length) {
        throw new Error(`expected ${length}-bit genome`);
      }
      const g = new Uint8Array(length);
      for (let i = 0; i < length; i += 1) g[i] = wire[i] === "1" ? 1 : 0;
      return g;
    },
    summarize: (g) => {
      const bits = g as Uint8Array;
      let ones = 0;
      for (const bit of bits) ones += bit;
      return `${ones}/${bits.length} ones`;
    },
  };
}

export interface F15Instance {
  D: number;
  m: number;
  seed: number;
  bounds: [number, number];
  o: number[];
  M: number[][];
  P: number[];
}

export function rastriginSum(values: Float64Array): number {
  let total = 0;
  for (const x of values) total += x * x - 10 * Math.cos(2 * Math.PI * x) + 10;
  return total;
}

export function f15Value(x: Float64Array, inst: F15Instance): number {
  const groups = inst.D / inst.m;
  const rotated = new Float64Array(inst.m);
  let total = 0;
  for (let k = 0; k < groups; k += 1) {
    for (let j = 0; j < inst.m; j += 1) {
      let acc = 0;
      for (let i = 0; i < inst.m; i += 1) {
        const coord = inst.P[k * inst.m + i];
        acc += (x[coord] - inst.o[coord]) * inst.M[i][j];
      }
      rotated[j] = acc;
    }
    total += rastriginSum(rotated);
  }
  return total;
}

export function makeF15Problem(inst: F15Instance, targetFitness: number | null): Problem {
  const [lo, hi] = inst.bounds;
  const sigma = 0.05 * (hi - lo);
  return {
    kind: "real",
    name: "f15",
    length: inst.D,
    direction: "minimize",
    targetFitness,
    evaluate: (g) => f15Value(g as Float64Array, inst),
    randomGenome: (rng) => {
      const g = new Float64Array(inst.D);
      for (let i = 0; i < inst.D; i += 1) g[i] = lo + rng() * (hi - lo);
      return g;
    },
    crossover: (a, b, rng) => {
      const x = a as Float64Array;
      const y = b as Float64Array;
      const childA = new Float64Array(inst.D);
      const childB = new Float64Array(inst.D);
      for (let i = 0; i < inst.D; i += 1) {
        const alpha = rng();
        childA[i] = alpha * x[i] + (1 - alpha) * y[i];
        childB[i] = alpha * y[i] + (1 - alpha) * x[i];
      }
      return [childA, childB];
    },
    mutate: (g, rate, rng) => {
      const v = g as Float64Array;
      for (let i = 0; i < v.length; i += 1) {
        if (rng() < rate) {
          v[i] = Math.min(hi, Math.max(lo, v[i] + gaussian(rng) * sigma));
        }
      }
    },
    encode: (g) => Array.from(g as Float64Array),
    decode: (wire) => {
      if (!Array.isArray(wire) || wire.length !== inst.D) {
        throw new Error(`expected ${inst.D} coordinates`);
      }
      return Float64Array.from(wire);
    },
    summarize: (g) => {
      const v = g as Float64Array;
      let norm = 0;
      for (const x of v) norm += x * x;
      return `|x| = ${Math.sqrt(norm).toFixed(2)}`;
    },
  };
}

export interface ProblemDescriptor {
  kind: "trap" | "f15";
  target_fitness?: number | null;
  instance?: F15Instance;
  [key: string]: unknown;
}

export function problemFromDescriptor(desc: ProblemDescriptor): Problem {
  if (desc.kind === "trap") {
    return makeTrapProblem(desc as unknown as TrapConfig);
  }
  if (desc.kind === "f15") {
    if (!desc.instance) throw new Error("f15 descriptor carries no instance");
    return makeF15Problem(desc.instance, (desc.target_fitness as number | null) ?? 0);
  }
  throw new Error(`unknown problem kind: ${(desc as { kind?: string }).kind}`);
}
