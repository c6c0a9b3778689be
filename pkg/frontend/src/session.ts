/**
 * Session client: drives one live session against the service.
 *
 * All mapped cursor positions, gains and scales shown anywhere in the UI
 * come from the service's `mapped` replies; this module performs no
 * transfer math of its own. Input timestamps are forced strictly
 * monotone before they leave the client.
 */

import {
  ClientMessage,
  ErrorMessage,
  HelloMessage,
  LineSplitter,
  MappedMessage,
  ProtocolError,
  ServerMessage,
  SessionEndMessage,
  TouchState,
  TrialEventMessage,
  decodeServerMessage,
  encodeMessage,
} from "./protocol.js";

export interface Transport {
  send(line: string): void;
  onData(cb: (chunk: string) => void): void;
  onClose(cb: () => void): void;
  close(): void;
}

export type TrialPhase = "red" | "green" | "done";

export interface ViewState {
  connected: boolean;
  config: Record<string, unknown> | null;
  /** Last mapped point reported by the service, in display meters. */
  mapped: { fx: number; fy: number } | null;
  gain: number;
  scale: number;
  phase: TrialPhase;
  trial: number;
  misses: number;
  lastMt: number | null;
  completedTrials: number;
  error: string | null;
}

const MIN_TIME_STEP = 1e-6;

export class SessionClient {
  readonly state: ViewState = {
    connected: true,
    config: null,
    mapped: null,
    gain: 1.0,
    scale: 1.0,
    phase: "red",
    trial: 0,
    misses: 0,
    lastMt: null,
    completedTrials: 0,
    error: null,
  };

  /** Every mapped reply, in arrival order (HUD history and tests). */
  readonly mappedLog: MappedMessage[] = [];
  readonly trialEvents: TrialEventMessage[] = [];
  logRef: string | null = null;

  private lastSentT = -Infinity;
  private splitter = new LineSplitter();
  private listeners: Array<(msg: ServerMessage) => void> = [];

  constructor(private transport: Transport) {
    transport.onData((chunk) => {
      for (const line of this.splitter.push(chunk)) {
        this.handleLine(line);
      }
    });
    transport.onClose(() => {
      if (this.state.phase !== "done" && this.logRef === null) {
        this.state.error = this.state.error ?? "connection closed";
      }
      this.state.connected = false;
    });
  }

  onMessage(cb: (msg: ServerMessage) => void): void {
    this.listeners.push(cb);
  }

  hello(config: Record<string, unknown>): void {
    this.send({ tag: "hello", config });
  }

  calibSample(z: number): void {
    this.send({ tag: "calib_sample", z });
  }

  calibDone(): void {
    this.send({ tag: "calib_done" });
  }

  /** Emits one input sample; the timestamp is clamped to stay monotone. */
  sendInput(t: number, x: number, y: number, z: number, touch: TouchState): number {
    if (!Number.isFinite(t)) {
      throw new ProtocolError(`non-finite input timestamp: ${t}`);
    }
    const sent = t > this.lastSentT ? t : this.lastSentT + MIN_TIME_STEP;
    this.lastSentT = sent;
    this.send({ tag: "input", t: sent, x, y, z, touch });
    return sent;
  }

  endSession(): void {
    this.send({ tag: "session_end" });
  }

  close(): void {
    this.transport.close();
  }

  private send(msg: ClientMessage): void {
    this.transport.send(encodeMessage(msg) + "\n");
  }

  private handleLine(line: string): void {
    let msg: ServerMessage;
    try {
      msg = decodeServerMessage(line);
    } catch (err) {
      this.state.error = err instanceof Error ? err.message : String(err);
      return;
    }
    switch (msg.tag) {
      case "hello":
        this.state.config = (msg as HelloMessage).config;
        break;
      case "mapped": {
        const m = msg as MappedMessage;
        this.mappedLog.push(m);
        this.state.mapped = { fx: m.fx, fy: m.fy };
        this.state.gain = m.gain;
        this.state.scale = m.scale;
        break;
      }
      case "trial_event": {
        const ev = msg as TrialEventMessage;
        this.trialEvents.push(ev);
        if (ev.kind === "green_active") {
          this.state.phase = "green";
          this.state.trial = ev.trial;
        } else if (ev.kind === "acquired") {
          this.state.phase = "red";
          this.state.lastMt = ev.mt_s;
          this.state.misses = ev.misses;
          this.state.completedTrials += 1;
        } else {
          this.state.phase = "done";
        }
        break;
      }
      case "session_end":
        this.logRef = (msg as SessionEndMessage).log_ref ?? "";
        break;
      case "error":
        this.state.error = (msg as ErrorMessage).message;
        break;
    }
    for (const cb of this.listeners) {
      cb(msg);
    }
  }
}
