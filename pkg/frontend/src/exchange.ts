/**
 * Pool exchange over fetch: PUT the island's best, GET a random migrant.
 *
 * Failures never propagate into the island loop; they start an exponential
 * backoff clock and the island simply keeps evolving. An ack carrying a
 * different experiment id than the one this session first saw means the
 * experiment ended while we were computing.
 */

import {
  buildPutBody,
  parsePutAck,
  parseRandomEntry,
  type WireGenome,
} from "./protocol.js";

export interface ExchangeOutcome {
  migrant?: { genome: WireGenome; fitness: number };
  solvedConfirmed?: boolean;
  experimentChanged?: boolean;
  failed?: boolean;
}

export class PoolExchange {
  private experimentId: number | null = null;
  private consecutiveFailures = 0;
  private nextAttemptAt = 0;
  puts = 0;
  gets = 0;
  failures = 0;

  constructor(
    private readonly serverUrl: string,
    private readonly initialBackoffMs = 500,
    private readonly maxBackoffMs = 30_000,
  ) {}

  private registerFailure(): ExchangeOutcome {
    this.failures += 1;
    this.consecutiveFailures += 1;
    const delay = Math.min(
      this.maxBackoffMs,
      this.initialBackoffMs * 2 ** (this.consecutiveFailures - 1),
    );
    this.nextAttemptAt = Date.now() + delay;
    return { failed: true };
  }

  /** One full exchange; resolves without throwing. */
  async exchange(
    uuid: string,
    genome: WireGenome,
    fitness: number,
    generation: number,
  ): Promise<ExchangeOutcome> {
    if (Date.now() < this.nextAttemptAt) return {};
    let ack;
    try {
      const body = buildPutBody(uuid, genome, fitness, generation);
      const resp = await fetch(`${this.serverUrl}/v1/pool`, {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      });
      if (!resp.ok) throw new Error(`put returned ${resp.status}`);
      ack = parsePutAck(await resp.json());
    } catch {
      return this.registerFailure();
    }
    this.puts += 1;
    this.consecutiveFailures = 0;
    this.nextAttemptAt = 0;

    if (this.experimentId === null) {
      this.experimentId = ack.experimentId;
    } else if (ack.experimentId !== this.experimentId) {
      return ack.solved ? { solvedConfirmed: true } : { experimentChanged: true };
    }
    if (ack.solved) return { solvedConfirmed: true };

    try {
      const resp = await fetch(`${this.serverUrl}/v1/pool/random`);
      if (resp.status === 404) {
        this.gets += 1;
        return {};
      }
      if (!resp.ok) throw new Error(`get returned ${resp.status}`);
      const entry = parseRandomEntry(await resp.json());
      this.gets += 1;
      return { migrant: entry };
    } catch {
      return this.registerFailure();
    }
  }

  /** Announce a locally found solution (final PUT of the incarnation). */
  async announce(
    uuid: string,
    genome: WireGenome,
    fitness: number,
    generation: number,
  ): Promise<void> {
    try {
      const body = buildPutBody(uuid, genome, fitness, generation);
      await fetch(`${this.serverUrl}/v1/pool`, {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      });
      this.puts += 1;
    } catch {
      this.failures += 1;
    }
  }
}
