import { describe, expect, it } from "vitest";

import {
  LineSplitter,
  ProtocolError,
  decodeServerMessage,
  encodeMessage,
} from "../src/protocol.js";

describe("encodeMessage", () => {
  it("serializes input messages as single-line JSON", () => {
    const line = encodeMessage({
      tag: "input",
      t: 1.5,
      x: 0.01,
      y: -0.02,
      z: 0.05,
      touch: "none",
    });
    expect(line).not.toContain("\n");
    expect(JSON.parse(line)).toEqual({
      tag: "input",
      t: 1.5,
      x: 0.01,
      y: -0.02,
      z: 0.05,
      touch: "none",
    });
  });
});

describe("decodeServerMessage", () => {
  it("round trips a mapped message", () => {
    const msg = decodeServerMessage(
      '{"tag":"mapped","t":0.1,"fx":0.2,"fy":0.3,"gain":5.09,"scale":1.0}',
    );
    expect(msg.tag).toBe("mapped");
    if (msg.tag === "mapped") {
      expect(msg.gain).toBeCloseTo(5.09, 12);
    }
  });

  it("accepts every trial event kind", () => {
    for (const kind of ["green_active", "acquired", "session_done"]) {
      const msg = decodeServerMessage(
        JSON.stringify({ tag: "trial_event", kind, trial: 0, mt_s: 0, misses: 0 }),
      );
      expect(msg.tag).toBe("trial_event");
    }
  });

  it("rejects invalid JSON", () => {
    expect(() => decodeServerMessage("{nope")).toThrow(ProtocolError);
  });

  it("rejects unknown tags", () => {
    expect(() => decodeServerMessage('{"tag":"bogus"}')).toThrow(ProtocolError);
  });

  it("rejects mapped messages with missing fields", () => {
    expect(() =>
      decodeServerMessage('{"tag":"mapped","t":0.1,"fx":0.2}'),
    ).toThrow(ProtocolError);
  });

  it("rejects unknown trial event kinds", () => {
    expect(() =>
      decodeServerMessage('{"tag":"trial_event","kind":"warp","trial":0}'),
    ).toThrow(ProtocolError);
  });
});

describe("LineSplitter", () => {
  it("reassembles messages split across chunks", () => {
    const splitter = new LineSplitter();
    expect(splitter.push('{"tag":"err')).toEqual([]);
    expect(splitter.push('or","message":"x"}\n{"tag":')).toEqual([
      '{"tag":"error","message":"x"}',
    ]);
    expect(splitter.push('"session_end"}\n')).toEqual(['{"tag":"session_end"}']);
  });

  it("handles several lines in one chunk and skips blanks", () => {
    const splitter = new LineSplitter();
    const lines = splitter.push("a\n\nb\nc\n");
    expect(lines).toEqual(["a", "b", "c"]);
  });
});
