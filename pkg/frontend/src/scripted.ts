/**
 * Scripted session driver: completes trials the way a careful human
 * would, by closed-loop feedback. It taps the red start target, reads
 * the goal target from the service's trial event, raises the finger,
 * and steers the cursor using only the service-reported mapped position
 * and gain until the cursor sits inside the goal, then taps.
 *
 * No transfer math is computed locally; every cursor position and every
 * gain value used for steering comes from `mapped` replies.
 */

import { MappedMessage, ServerMessage, TouchState, TrialEventMessage } from "./protocol.js";
import { SessionClient } from "./session.js";

export interface ScriptedOptions {
  trials: number;
  hMin: number;
  hMax: number;
  /** Samples between red tap and green tap are spaced by this, seconds. */
  samplePeriod: number;
  maxSteps: number;
}

export const DEFAULT_SCRIPTED: ScriptedOptions = {
  trials: 10,
  hMin: 0.0,
  hMax: 0.10,
  samplePeriod: 1 / 60,
  maxSteps: 400,
};

interface Target {
  x: number;
  y: number;
  w: number;
}

export class ScriptedDriver {
  private t = 0;
  private finger = { x: 0, y: 0 };
  private pending: Array<(msg: ServerMessage) => void> = [];

  constructor(private client: SessionClient, private opts: ScriptedOptions) {
    client.onMessage((msg) => {
      const waiters = this.pending;
      this.pending = [];
      for (const w of waiters) w(msg);
    });
  }

  private nextMessage(): Promise<ServerMessage> {
    return new Promise((resolve) => this.pending.push(resolve));
  }

  private async waitFor<T extends ServerMessage>(
    match: (msg: ServerMessage) => msg is T,
  ): Promise<T> {
    for (;;) {
      const msg = await this.nextMessage();
      if (match(msg)) return msg;
    }
  }

  private async input(z: number, touch: TouchState): Promise<MappedMessage> {
    this.t += this.opts.samplePeriod;
    const replyPromise = this.waitFor(
      (m): m is MappedMessage => m.tag === "mapped",
    );
    this.client.sendInput(this.t, this.finger.x, this.finger.y, z, touch);
    return replyPromise;
  }

  /** Tap without moving: the service maps the tap at the current cursor. */
  private async tap(z: number): Promise<void> {
    await this.input(z, "down");
    await this.input(z, "up");
  }

  async run(): Promise<void> {
    const { opts } = this;
    for (let trial = 0; trial < opts.trials; trial++) {
      // tap the red start target; the green target arrives in the event
      const greenPromise = this.waitFor(
        (m): m is TrialEventMessage => m.tag === "trial_event" && m.kind === "green_active",
      );
      await this.tap(opts.hMin);
      const green = await greenPromise;
      const target: Target | undefined = green.target;
      if (!target) {
        throw new Error("green_active event carried no target");
      }

      // raise the finger, then steer by feedback until inside the target
      let mapped = await this.input(opts.hMax, "none");
      let steps = 0;
      for (;;) {
        const ex = target.x - mapped.fx;
        const ey = target.y - mapped.fy;
        if (Math.hypot(ex, ey) <= target.w / 4) break;
        if (++steps > opts.maxSteps) {
          throw new Error(`trial ${trial}: did not reach target in ${opts.maxSteps} steps`);
        }
        // service-reported gain converts the display error to finger motion
        this.finger = {
          x: this.finger.x + (0.5 * ex) / mapped.gain,
          y: this.finger.y + (0.5 * ey) / mapped.gain,
        };
        mapped = await this.input(opts.hMax, "none");
      }

      const acquiredPromise = this.waitFor(
        (m): m is TrialEventMessage => m.tag === "trial_event" && m.kind === "acquired",
      );
      await this.tap(opts.hMax);
      await acquiredPromise;
      // the environment resets; restart the finger from a neutral pose
      this.finger = { x: 0, y: 0 };
    }
  }
}

function waitForTag(client: SessionClient, tag: string): Promise<ServerMessage> {
  return new Promise((resolve) => {
    let settled = false;
    client.onMessage((msg) => {
      if (!settled && msg.tag === tag) {
        settled = true;
        resolve(msg);
      }
    });
  });
}

export async function runScriptedSession(
  client: SessionClient,
  overrides: Record<string, unknown>,
  opts: ScriptedOptions = DEFAULT_SCRIPTED,
): Promise<string> {
  const driver = new ScriptedDriver(client, opts);
  const helloReply = waitForTag(client, "hello");
  client.hello(overrides);
  await helloReply;

  const calibReply = waitForTag(client, "hello");
  for (let i = 0; i < 10; i++) client.calibSample(opts.hMin);
  for (let i = 0; i < 10; i++) client.calibSample(opts.hMax);
  client.calibDone();
  await calibReply;

  await driver.run();

  const ended = waitForTag(client, "session_end");
  client.endSession();
  await ended;
  return client.logRef ?? "";
}
