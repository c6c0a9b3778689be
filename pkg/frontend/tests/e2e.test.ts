/**
 * End-to-end: a scripted client completes a 10-trial height-mapped
 * session against the real Python service over TCP, and the produced
 * log passes both this client's parser and the Python tooling.
 */

import { spawn, spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { renderHud } from "../src/hud.js";
import { parseTrialLog } from "../src/replay.js";
import { runScriptedSession, DEFAULT_SCRIPTED } from "../src/scripted.js";
import { SessionClient } from "../src/session.js";
import { TcpTransport } from "../src/tcp.js";

const REPO_ROOT = path.resolve(__dirname, "..", "..");
const PORT = 17000 + Math.floor(Math.random() * 10_000);

let service: ReturnType<typeof spawn>;
let logDir: string;

beforeAll(async () => {
  logDir = fs.mkdtempSync(path.join(os.tmpdir(), "session-logs-"));
  service = spawn(
    "python3",
    ["-m", "cdmap.cli", "serve", "--port", String(PORT), "--log-dir", logDir],
    { cwd: REPO_ROOT, stdio: ["ignore", "ignore", "pipe"] },
  );
  await new Promise<void>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("service did not start")), 15_000);
    service.stderr!.on("data", (chunk: Buffer) => {
      if (chunk.toString().includes("session service")) {
        clearTimeout(timer);
        resolve();
      }
    });
    service.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited early with code ${code}`));
    });
  });
});

afterAll(() => {
  service?.kill();
});

describe("scripted 10-trial session", () => {
  it("completes, logs, and parses end to end", async () => {
    const transport = await TcpTransport.connect("127.0.0.1", PORT);
    const client = new SessionClient(transport);

    // per-frame check: the HUD readout must equal the service gain
    const hudGains: string[] = [];
    const serviceGains: string[] = [];
    client.onMessage((msg) => {
      if (msg.tag === "mapped") {
        hudGains.push(renderHud(client.state).gain);
        serviceGains.push(msg.gain.toFixed(2));
      }
    });

    const logRef = await runScriptedSession(
      client,
      { method: "ZM", trial_limit: 10, seed: 11, subject: 2 },
      DEFAULT_SCRIPTED,
    );
    client.close();

    expect(client.state.phase).toBe("done");
    expect(client.state.completedTrials).toBe(10);
    expect(client.state.error).toBeNull();
    expect(hudGains.length).toBeGreaterThan(0);
    expect(hudGains).toEqual(serviceGains);

    // the produced log parses in the client...
    expect(logRef).not.toBe("");
    const text = fs.readFileSync(logRef, "utf-8");
    const records = parseTrialLog(text);
    expect(records).toHaveLength(10);
    expect(records.every((r) => r.method === "ZM" && r.hit)).toBe(true);

    // ...and in the Python tooling: strict log parser, then analyze
    const parse = spawnSync(
      "python3",
      [
        "-c",
        "import sys; from cdmap.logs import read_log_file; " +
          "records = read_log_file(sys.argv[1]); " +
          "assert len(records) == 10, len(records)",
        logRef,
      ],
      { cwd: REPO_ROOT, encoding: "utf-8" },
    );
    expect(parse.stderr).toBe("");
    expect(parse.status).toBe(0);

    const analyze = spawnSync(
      "python3",
      ["-m", "cdmap.cli", "analyze", logRef],
      { cwd: REPO_ROOT, encoding: "utf-8" },
    );
    expect(analyze.status).toBe(0);
    const report = JSON.parse(analyze.stdout);
    expect(report.mt.overall.methods).toEqual(["ZM"]);
  });
});
