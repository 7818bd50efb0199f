import { describe, expect, it } from "vitest";

import {
  buildPutBody,
  isWireGenome,
  parsePutAck,
  parseRandomEntry,
  validatePutBody,
} from "../src/protocol.js";

const UUID = "123e4567-e89b-42d3-a456-426614174000";

describe("wire genome", () => {
  it("accepts bit strings and number arrays", () => {
    expect(isWireGenome("0101")).toBe(true);
    expect(isWireGenome([0.5, -1.25])).toBe(true);
  });

  it("rejects anything else", () => {
    expect(isWireGenome("01x1")).toBe(false);
    expect(isWireGenome([])).toBe(false);
    expect(isWireGenome([1, NaN])).toBe(false);
    expect(isWireGenome(5)).toBe(false);
  });
});

describe("put body", () => {
  it("builds exactly the documented shape", () => {
    const body = buildPutBody(UUID, "0101", 2.5, 7);
    expect(Object.keys(body).sort()).toEqual(["fitness", "generation", "genome", "uuid"]);
    expect(JSON.parse(JSON.stringify(body))).toEqual({
      uuid: UUID,
      genome: "0101",
      fitness: 2.5,
      generation: 7,
    });
  });

  it("rejects malformed bodies before they reach the network", () => {
    expect(() => buildPutBody("nope", "0101", 1, 0)).toThrow(/uuid/);
    expect(() => buildPutBody(UUID, "012", 1, 0)).toThrow(/genome/);
    expect(() => buildPutBody(UUID, "0101", Infinity, 0)).toThrow(/fitness/);
    expect(() => buildPutBody(UUID, "0101", 1, -1)).toThrow(/generation/);
    expect(() => buildPutBody(UUID, "0101", 1, 1.5)).toThrow(/generation/);
    expect(() => validatePutBody(null)).toThrow();
  });
});

describe("responses", () => {
  it("parses acks", () => {
    expect(parsePutAck({ accepted: true, solved: false, experimentId: 3 })).toEqual({
      accepted: true,
      solved: false,
      experimentId: 3,
    });
    expect(() => parsePutAck({ accepted: "yes" })).toThrow(/ack/);
  });

  it("parses pool entries of both genome kinds", () => {
    expect(parseRandomEntry({ genome: "0011", fitness: 1 })).toEqual({
      genome: "0011",
      fitness: 1,
    });
    expect(parseRandomEntry({ genome: [0.25, 3], fitness: -2 }).genome).toEqual([0.25, 3]);
    expect(() => parseRandomEntry({ genome: "21", fitness: 1 })).toThrow(/entry/);
    expect(() => parseRandomEntry({ genome: "01", fitness: NaN })).toThrow(/fitness/);
  });
});
