/**
 * Wire protocol: newline-delimited JSON messages exchanged with the
 * session service. The client never computes mapping math; it only
 * serializes inputs and renders what the service reports back.
 */

export type TouchState = "down" | "up" | "none";

export interface HelloMessage {
  tag: "hello";
  config: Record<string, unknown>;
}

export interface CalibSampleMessage {
  tag: "calib_sample";
  z: number;
}

export interface CalibDoneMessage {
  tag: "calib_done";
}

export interface InputMessage {
  tag: "input";
  t: number;
  x: number;
  y: number;
  z: number;
  touch: TouchState;
}

export interface SessionEndMessage {
  tag: "session_end";
  log_ref?: string;
}

export interface MappedMessage {
  tag: "mapped";
  t: number;
  fx: number;
  fy: number;
  gain: number;
  scale: number;
}

export interface TrialEventMessage {
  tag: "trial_event";
  kind: "green_active" | "acquired" | "session_done";
  trial: number;
  mt_s: number;
  misses: number;
  /** goal target geometry, present on green_active events */
  target?: { x: number; y: number; w: number };
}

export interface ErrorMessage {
  tag: "error";
  message: string;
}

export type ClientMessage =
  | HelloMessage
  | CalibSampleMessage
  | CalibDoneMessage
  | InputMessage
  | SessionEndMessage;

export type ServerMessage =
  | HelloMessage
  | MappedMessage
  | TrialEventMessage
  | SessionEndMessage
  | ErrorMessage;

export class ProtocolError extends Error {}

export function encodeMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

const SERVER_TAGS = new Set(["hello", "mapped", "trial_event", "session_end", "error"]);

export function decodeServerMessage(line: string): ServerMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    throw new ProtocolError(`not valid JSON: ${line.slice(0, 80)}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new ProtocolError("message must be a JSON object");
  }
  const tag = (obj as { tag?: unknown }).tag;
  if (typeof tag !== "string" || !SERVER_TAGS.has(tag)) {
    throw new ProtocolError(`unknown server message tag: ${String(tag)}`);
  }
  if (tag === "mapped") {
    for (const field of ["t", "fx", "fy", "gain", "scale"]) {
      if (typeof (obj as Record<string, unknown>)[field] !== "number") {
        throw new ProtocolError(`mapped message missing numeric ${field}`);
      }
    }
  }
  if (tag === "trial_event") {
    const kind = (obj as Record<string, unknown>).kind;
    if (kind !== "green_active" && kind !== "acquired" && kind !== "session_done") {
      throw new ProtocolError(`unknown trial event kind: ${String(kind)}`);
    }
  }
  return obj as ServerMessage;
}

/** Splits a raw byte stream into complete lines, buffering partials. */
export class LineSplitter {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk;
    const parts = this.buffer.split("\n");
    this.buffer = parts.pop() ?? "";
    return parts.filter((p) => p.trim().length > 0);
  }
}
