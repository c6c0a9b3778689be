/**
 * Browser entry point: wires the canvas, HUD, and input capture to a
 * live session over the WebSocket bridge, plus a read-only replay mode
 * for previously recorded trial logs.
 */

import { fitPixelsPerMeter, InputCapture } from "./input.js";
import { renderHud, sessionSummary } from "./hud.js";
import { LogParseError, parseTrialLog, ReplayPlayer } from "./replay.js";
import { SessionClient } from "./session.js";
import { TrialEventMessage } from "./protocol.js";
import { drawScene, sceneFromServiceConfig, SceneConfig, TargetShape } from "./view.js";
import { WebSocketTransport } from "./ws.js";

const $ = (id: string) => document.getElementById(id) as HTMLElement;

interface App {
  client: SessionClient | null;
  scene: SceneConfig | null;
  capture: InputCapture | null;
  redTarget: TargetShape | null;
  greenTarget: TargetShape | null;
  touchHeld: boolean;
  startedAt: number;
}

const app: App = {
  client: null,
  scene: null,
  capture: null,
  redTarget: null,
  greenTarget: null,
  touchHeld: false,
  startedAt: 0,
};

function setBanner(text: string, isError: boolean): void {
  const banner = $("banner");
  banner.textContent = text;
  banner.className = isError ? "banner error" : "banner";
}

function updateHud(): void {
  if (!app.client) return;
  const hud = renderHud(app.client.state);
  $("hud-gain").textContent = hud.gain;
  $("hud-scale").textContent = hud.scale;
  $("hud-phase").textContent = hud.phase;
  $("hud-block").textContent = `${hud.block} (${hud.blockProgress})`;
  $("hud-misses").textContent = hud.misses;
  $("hud-mt").textContent = hud.lastMt;
  $("hud-status").textContent = hud.status;
  const live = app.client.state.phase === "green"
    ? ((performance.now() - app.startedAt) / 1000).toFixed(2)
    : "-";
  $("hud-timer").textContent = live;
}

function redraw(): void {
  const canvas = $("scene") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (!ctx || !app.scene || !app.client) return;
  drawScene(ctx, app.scene, app.client.state, app.redTarget, app.greenTarget);
}

async function connect(): Promise<void> {
  const url = ($("bridge-url") as HTMLInputElement).value;
  const method = ($("method") as HTMLSelectElement).value;
  try {
    const transport = await WebSocketTransport.connect(url);
    const client = new SessionClient(transport);
    app.client = client;

    client.onMessage((msg) => {
      if (msg.tag === "hello") {
        const config = client.state.config as Record<string, unknown>;
        const canvas = $("scene") as HTMLCanvasElement;
        const display = config.display as { width: number };
        const ppm = fitPixelsPerMeter(display.width, canvas.width);
        const origin = { x: canvas.width / 2, y: canvas.height / 2 };
        app.scene = sceneFromServiceConfig(config, ppm, origin);
        const zmap = config.zmap as { h_min: number; h_max: number };
        app.capture = new InputCapture({
          pixelsPerMeter: ppm,
          originPx: origin,
          hMin: zmap.h_min,
          hMax: zmap.h_max,
          zStep: (zmap.h_max - zmap.h_min) / 10,
        });
        const task = (msg as unknown as { task?: { red?: TargetShape; target?: TargetShape } }).task;
        app.redTarget = task?.red ?? null;
        app.greenTarget = task?.target ?? null;
        setBanner(`connected (${method})`, false);
      } else if (msg.tag === "trial_event") {
        const ev = msg as TrialEventMessage;
        if (ev.kind === "green_active") {
          app.greenTarget = (ev as unknown as { target?: TargetShape }).target ?? null;
          app.startedAt = performance.now();
        } else if (ev.kind === "session_done") {
          client.endSession();
        }
      } else if (msg.tag === "error") {
        setBanner(`service error: ${client.state.error}`, true);
      }
      updateHud();
      redraw();
    });

    client.hello({ method, trial_limit: 10 });
  } catch (err) {
    setBanner(err instanceof Error ? err.message : String(err), true);
  }
}

function sendSample(touch: "down" | "up" | "none"): void {
  if (!app.client || !app.capture || app.client.state.phase === "done") return;
  const s = app.capture.sample();
  app.client.sendInput(performance.now() / 1000, s.x, s.y, s.z, touch);
}

function wireInputs(): void {
  const canvas = $("scene") as HTMLCanvasElement;
  canvas.addEventListener("pointermove", (ev) => {
    if (!app.capture) return;
    const rect = canvas.getBoundingClientRect();
    app.capture.pointerMove(ev.clientX - rect.left, ev.clientY - rect.top);
    sendSample("none");
  });
  canvas.addEventListener("pointerdown", () => {
    app.touchHeld = true;
    sendSample("down");
  });
  canvas.addEventListener("pointerup", () => {
    app.touchHeld = false;
    sendSample("up");
  });
  canvas.addEventListener("wheel", (ev) => {
    if (!app.capture) return;
    ev.preventDefault();
    app.capture.wheel(ev.deltaY < 0 ? 1 : -1);
    sendSample("none");
  });

  $("connect").addEventListener("click", () => void connect());

  $("log-file").addEventListener("change", (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    void file.text().then((text) => {
      try {
        const records = parseTrialLog(text);
        if (records.length === 0) {
          setBanner("log is empty", false);
          return;
        }
        const player = new ReplayPlayer(records);
        const rows = sessionSummary(records);
        $("summary").textContent = rows
          .map((r) => `ID category ${r.category}: mean MT ${r.meanMt} (${r.trials} trials)`)
          .join("\n");
        setBanner(`replay loaded: ${player.records.length} trials`, false);
      } catch (err) {
        setBanner(
          err instanceof LogParseError ? err.message : String(err),
          true,
        );
      }
    });
  });
}

wireInputs();
setBanner("not connected", false);
