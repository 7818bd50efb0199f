/**
 * One EA island: generational loop with tournament selection, crossover,
 * per-gene mutation and single elitism, plus the asynchronous migration
 * driver used by workers. The loop yields to the event queue between
 * generation batches so a worker stays responsive to messages, and
 * exchanges are fire-and-forget: evolution continues while the network
 * round trip is in flight and the outcome is applied at the next boundary.
 */

import { PoolExchange } from "./exchange.js";
import type { Genome, Problem } from "./problems.js";
import { mulberry32, randInt, type Rng } from "./rng.js";

export interface IslandOptions {
  popMin: number;
  popMax: number;
  tournamentSize: number;
  crossoverRate: number;
  mutationRate: number | null; // null: one expected flip per genome
  migrationInterval: number;
  maxEvaluations: number;
}

export const DEFAULT_OPTIONS: IslandOptions = {
  popMin: 128,
  popMax: 256,
  tournamentSize: 3,
  crossoverRate: 0.9,
  mutationRate: null,
  migrationInterval: 100,
  maxEvaluations: Number.MAX_SAFE_INTEGER,
};

interface Member {
  genome: Genome;
  fitness: number;
}

export class Island {
  readonly uuid: string;
  generation = 0;
  evaluations = 0;
  best: Member;
  private members: Member[];
  private readonly mutationRate: number;

  constructor(
    readonly problem: Problem,
    readonly options: IslandOptions,
    private readonly rng: Rng,
  ) {
    this.uuid = crypto.randomUUID();
    const span = options.popMax - options.popMin;
    const size = options.popMin + (span > 0 ? randInt(rng, span + 1) : 0);
    this.mutationRate = options.mutationRate ?? 1 / problem.length;
    this.members = [];
    for (let i = 0; i < size; i += 1) {
      const genome = problem.randomGenome(rng);
      this.members.push({ genome, fitness: problem.evaluate(genome) });
    }
    this.evaluations = size;
    this.best = this.cloneMember(this.bestOfPopulation());
  }

  private better(a: number, b: number): boolean {
    return this.problem.direction === "maximize" ? a > b : a < b;
  }

  private cloneMember(m: Member): Member {
    return { genome: m.genome.slice() as Genome, fitness: m.fitness };
  }

  private bestOfPopulation(): Member {
    let best = this.members[0];
    for (const m of this.members) {
      if (this.better(m.fitness, best.fitness)) best = m;
    }
    return best;
  }

  private tournament(): Member {
    let winner = this.members[randInt(this.rng, this.members.length)];
    for (let i = 1; i < this.options.tournamentSize; i += 1) {
      const rival = this.members[randInt(this.rng, this.members.length)];
      if (this.better(rival.fitness, winner.fitness)) winner = rival;
    }
    return winner;
  }

  solved(): boolean {
    const target = this.problem.targetFitness;
    if (target === null) return false;
    return this.problem.direction === "maximize"
      ? this.best.fitness >= target
      : this.best.fitness <= target;
  }

  stepGeneration(): void {
    const n = this.members.length;
    const elite = this.cloneMember(this.bestOfPopulation());
    const next: Member[] = [elite];
    while (next.length < n) {
      const p1 = this.tournament();
      const p2 = this.tournament();
      let g1: Genome;
      let g2: Genome;
      if (this.rng() < this.options.crossoverRate) {
        [g1, g2] = this.problem.crossover(p1.genome, p2.genome, this.rng);
      } else {
        g1 = p1.genome.slice() as Genome;
        g2 = p2.genome.slice() as Genome;
      }
      for (const genome of [g1, g2]) {
        if (next.length >= n) break;
        this.problem.mutate(genome, this.mutationRate, this.rng);
        const fitness = this.problem.evaluate(genome);
        this.evaluations += 1;
        next.push({ genome, fitness });
        if (this.better(fitness, this.best.fitness)) {
          this.best = { genome: genome.slice() as Genome, fitness };
        }
      }
    }
    this.members = next;
    this.generation += 1;
  }

  insertMigrant(genome: Genome): void {
    // wire fitness is advisory; score locally before it joins the population
    const fitness = this.problem.evaluate(genome);
    this.evaluations += 1;
    let worst = 0;
    for (let i = 1; i < this.members.length; i += 1) {
      if (this.better(this.members[worst].fitness, this.members[i].fitness)) worst = i;
    }
    this.members[worst] = { genome, fitness };
    if (this.better(fitness, this.best.fitness)) {
      this.best = { genome: genome.slice() as Genome, fitness };
    }
  }
}

export interface IterationInfo {
  uuid: string;
  generation: number;
  evaluations: number;
  bestFitness: number;
  genomeSummary: string;
}

export interface LoopCallbacks {
  onIteration(info: IterationInfo): void;
  onSolved(info: IterationInfo): void;
  /** experiment moved on; the island was abandoned and restarts */
  onExperimentChanged?(info: IterationInfo): void;
}

export type LoopResult = "solved" | "restart" | "stopped" | "budget";

export interface LoopHandle {
  stop(): void;
  done: Promise<LoopResult>;
}

function info(island: Island): IterationInfo {
  return {
    uuid: island.uuid,
    generation: island.generation,
    evaluations: island.evaluations,
    bestFitness: island.best.fitness,
    genomeSummary: island.problem.summarize(island.best.genome),
  };
}

/**
 * Drive one island incarnation. Returns a handle whose promise resolves
 * with the reason the loop ended; call stop() to end it cooperatively.
 */
export function runIslandLoop(
  problem: Problem,
  options: IslandOptions,
  seed: number,
  exchange: PoolExchange | null,
  callbacks: LoopCallbacks,
  generationsPerSlice = 10,
): LoopHandle {
  const island = new Island(problem, options, mulberry32(seed));
  let stopRequested = false;
  let inFlight = false;
  let pendingMigrant: Genome | null = null;
  let pendingStop: LoopResult | null = null;

  const launchExchange = () => {
    if (exchange === null || inFlight) return;
    inFlight = true;
    exchange
      .exchange(
        island.uuid,
        problem.encode(island.best.genome),
        island.best.fitness,
        island.generation,
      )
      .then((outcome) => {
        inFlight = false;
        if (outcome.solvedConfirmed) pendingStop = "solved";
        else if (outcome.experimentChanged) pendingStop = "restart";
        else if (outcome.migrant) {
          try {
            pendingMigrant = problem.decode(outcome.migrant.genome);
          } catch {
            // a migrant from a mismatched experiment; ignore it
          }
        }
      });
  };

  const done = new Promise<LoopResult>((resolve) => {
    const finish = async (result: LoopResult) => {
      if (result === "solved" && exchange !== null) {
        await exchange.announce(
          island.uuid,
          problem.encode(island.best.genome),
          island.best.fitness,
          island.generation,
        );
      }
      if (result === "solved") callbacks.onSolved(info(island));
      if (result === "restart") callbacks.onExperimentChanged?.(info(island));
      resolve(result);
    };

    const slice = () => {
      if (island.solved()) return void finish("solved");
      for (let i = 0; i < generationsPerSlice; i += 1) {
        if (stopRequested) return void finish("stopped");
        if (pendingStop) return void finish(pendingStop);
        if (island.evaluations >= options.maxEvaluations) return void finish("budget");
        if (pendingMigrant !== null) {
          island.insertMigrant(pendingMigrant);
          pendingMigrant = null;
        }
        island.stepGeneration();
        if (island.solved()) {
          callbacks.onIteration(info(island));
          return void finish("solved");
        }
        if (
          options.migrationInterval > 0 &&
          island.generation % options.migrationInterval === 0
        ) {
          launchExchange();
        }
      }
      callbacks.onIteration(info(island));
      setTimeout(slice, 0);
    };
    slice();
  });

  return { stop: () => (stopRequested = true), done };
}
