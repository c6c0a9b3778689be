import { describe, expect, it } from "vitest";

import { SessionClient, Transport } from "../src/session.js";

class FakeTransport implements Transport {
  sent: string[] = [];
  private dataCbs: Array<(chunk: string) => void> = [];
  private closeCbs: Array<() => void> = [];
  closed = false;

  send(line: string): void {
    this.sent.push(line);
  }

  onData(cb: (chunk: string) => void): void {
    this.dataCbs.push(cb);
  }

  onClose(cb: () => void): void {
    this.closeCbs.push(cb);
  }

  close(): void {
    this.closed = true;
  }

  // test hooks
  receive(obj: unknown): void {
    for (const cb of this.dataCbs) cb(JSON.stringify(obj) + "\n");
  }

  drop(): void {
    for (const cb of this.closeCbs) cb();
  }

  sentMessages(): Array<Record<string, unknown>> {
    return this.sent.map((line) => JSON.parse(line));
  }
}

function mapped(t: number, fx: number, fy: number, gain: number, scale = 1.0) {
  return { tag: "mapped", t, fx, fy, gain, scale };
}

describe("SessionClient", () => {
  it("renders exactly the last mapped message, never local math", () => {
    const transport = new FakeTransport();
    const client = new SessionClient(transport);
    transport.receive(mapped(0.1, 0.02, 0.03, 1.0));
    transport.receive(mapped(0.2, 0.25, -0.1, 5.09));
    expect(client.state.mapped).toEqual({ fx: 0.25, fy: -0.1 });
    expect(client.state.gain).toBe(5.09);
    expect(client.mappedLog).toHaveLength(2);
  });

  it("keeps the HUD gain equal to the service-reported gain per frame", () => {
    const transport = new FakeTransport();
    const client = new SessionClient(transport);
    const gains = [1.0, 2.5, 3.3, 5.09, 4.0];
    const seen: number[] = [];
    client.onMessage((msg) => {
      if (msg.tag === "mapped") seen.push(client.state.gain);
    });
    gains.forEach((g, i) => transport.receive(mapped(i * 0.1, 0, 0, g)));
    expect(seen).toEqual(gains);
  });

  it("forces strictly monotone input timestamps", () => {
    const transport = new FakeTransport();
    const client = new SessionClient(transport);
    client.sendInput(1.0, 0, 0, 0, "none");
    client.sendInput(1.0, 0, 0, 0, "none"); // duplicate t
    client.sendInput(0.5, 0, 0, 0, "none"); // goes backwards
    const ts = transport.sentMessages().map((m) => m.t as number);
    expect(ts[0]).toBe(1.0);
    for (let i = 1; i < ts.length; i++) {
      expect(ts[i]).toBeGreaterThan(ts[i - 1]);
    }
  });

  it("rejects non-finite timestamps", () => {
    const client = new SessionClient(new FakeTransport());
    expect(() => client.sendInput(NaN, 0, 0, 0, "none")).toThrow();
  });

  it("tracks trial phase and counters from trial events", () => {
    const transport = new FakeTransport();
    const client = new SessionClient(transport);
    expect(client.state.phase).toBe("red");
    transport.receive({ tag: "trial_event", kind: "green_active", trial: 3, mt_s: 0, misses: 0 });
    expect(client.state.phase).toBe("green");
    expect(client.state.trial).toBe(3);
    transport.receive({ tag: "trial_event", kind: "acquired", trial: 3, mt_s: 1.25, misses: 2 });
    expect(client.state.phase).toBe("red");
    expect(client.state.lastMt).toBe(1.25);
    expect(client.state.misses).toBe(2);
    expect(client.state.completedTrials).toBe(1);
    transport.receive({ tag: "trial_event", kind: "session_done", trial: 3, mt_s: 1.25, misses: 2 });
    expect(client.state.phase).toBe("done");
  });

  it("stores the resolved config from hello", () => {
    const transport = new FakeTransport();
    const client = new SessionClient(transport);
    transport.receive({ tag: "hello", config: { method: "ZM" } });
    expect(client.state.config).toEqual({ method: "ZM" });
  });

  it("surfaces service errors in the view state", () => {
    const transport = new FakeTransport();
    const client = new SessionClient(transport);
    transport.receive({ tag: "error", message: "non-monotone timestamp" });
    expect(client.state.error).toContain("non-monotone");
  });

  it("marks unexpected disconnects as errors", () => {
    const transport = new FakeTransport();
    const client = new SessionClient(transport);
    transport.drop();
    expect(client.state.connected).toBe(false);
    expect(client.state.error).toBe("connection closed");
  });

  it("treats disconnect after session end as clean", () => {
    const transport = new FakeTransport();
    const client = new SessionClient(transport);
    transport.receive({ tag: "session_end", log_ref: "/tmp/x.jsonl" });
    transport.drop();
    expect(client.logRef).toBe("/tmp/x.jsonl");
    expect(client.state.error).toBeNull();
  });
});
