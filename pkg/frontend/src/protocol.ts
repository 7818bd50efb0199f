/**
 * Wire protocol for the chromosome pool API.
 *
 * Bodies must match the server byte-for-byte in shape: bit genomes travel
 * as '0'/'1' strings, real genomes as JSON number arrays. Every builder
 * validates before anything touches the network.
 */

export type WireGenome = string | number[];

export interface PutBody {
  uuid: string;
  genome: WireGenome;
  fitness: number;
  generation: number;
}

export interface PutAck {
  accepted: boolean;
  solved: boolean;
  experimentId: number;
}

export interface RandomEntry {
  genome: WireGenome;
  fitness: number;
}

export interface StatsBody {
  experimentId: number;
  poolSize: number;
  bestFitness: number | null;
  puts: number;
  gets: number;
  solutions: number;
  startedAt: string;
  uptime: number;
}

const UUID_RE = /^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$/i;
const BITS_RE = /^[01]+$/;

export function isWireGenome(value: unknown): value is WireGenome {
  if (typeof value === "string") return BITS_RE.test(value);
  return (
    Array.isArray(value) &&
    value.length > 0 &&
    value.every((v) => typeof v === "number" && Number.isFinite(v))
  );
}

export function validatePutBody(body: unknown): asserts body is PutBody {
  const b = body as Record<string, unknown>;
  if (typeof b !== "object" || b === null) throw new Error("put body must be an object");
  if (typeof b.uuid !== "string" || !UUID_RE.test(b.uuid)) {
    throw new Error(`put body uuid is not a uuid: ${String(b.uuid)}`);
  }
  if (!isWireGenome(b.genome)) throw new Error("put body genome is not a wire genome");
  if (typeof b.fitness !== "number" || !Number.isFinite(b.fitness)) {
    throw new Error("put body fitness must be a finite number");
  }
  if (typeof b.generation !== "number" || !Number.isInteger(b.generation) || b.generation < 0) {
    throw new Error("put body generation must be a non-negative integer");
  }
}

export function buildPutBody(
  uuid: string,
  genome: WireGenome,
  fitness: number,
  generation: number,
): PutBody {
  const body = { uuid, genome, fitness, generation };
  validatePutBody(body);
  return body;
}

export function parsePutAck(data: unknown): PutAck {
  const d = data as Record<string, unknown>;
  if (
    typeof d !== "object" ||
    d === null ||
    typeof d.accepted !== "boolean" ||
    typeof d.solved !== "boolean" ||
    typeof d.experimentId !== "number"
  ) {
    throw new Error(`malformed put ack: ${JSON.stringify(data)}`);
  }
  return { accepted: d.accepted, solved: d.solved, experimentId: d.experimentId };
}

export function parseRandomEntry(data: unknown): RandomEntry {
  const d = data as Record<string, unknown>;
  if (typeof d !== "object" || d === null || !isWireGenome(d.genome)) {
    throw new Error(`malformed pool entry: ${JSON.stringify(data)}`);
  }
  if (typeof d.fitness !== "number" || !Number.isFinite(d.fitness)) {
    throw new Error("pool entry fitness must be a finite number");
  }
  return { genome: d.genome as WireGenome, fitness: d.fitness };
}
