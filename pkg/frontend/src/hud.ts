/**
 * HUD model: pure formatting of the view state into display strings.
 * Gain and scale readouts always come from the last service reply held
 * in the view state; nothing here recomputes them.
 */

import { ViewState } from "./session.js";
import { TrialRecord, meanMtByCategory } from "./replay.js";

export const BLOCK_SIZE = 30;

export interface HudReadout {
  gain: string;
  scale: string;
  phase: string;
  trial: string;
  block: string;
  blockProgress: string;
  misses: string;
  lastMt: string;
  status: string;
}

export function formatSeconds(s: number): string {
  return `${s.toFixed(2)} s`;
}

export function blockOf(trialIndex: number): number {
  return Math.floor(trialIndex / BLOCK_SIZE) + 1;
}

export function renderHud(state: ViewState): HudReadout {
  const block = blockOf(state.trial);
  const within = (state.trial % BLOCK_SIZE) + 1;
  return {
    gain: state.gain.toFixed(2),
    scale: state.scale.toFixed(2),
    phase: state.phase,
    trial: `${state.trial + 1}`,
    block: `${block}`,
    blockProgress: `${within}/${BLOCK_SIZE}`,
    misses: `${state.misses}`,
    lastMt: state.lastMt === null ? "-" : formatSeconds(state.lastMt),
    status: state.error !== null
      ? `error: ${state.error}`
      : state.phase === "done"
        ? "session complete"
        : state.connected
          ? "live"
          : "disconnected",
  };
}

export interface SummaryRow {
  category: number;
  meanMt: string;
  trials: number;
}

/** Per-ID-category summary table for the end-of-session panel. */
export function sessionSummary(records: TrialRecord[]): SummaryRow[] {
  if (records.length === 0) return [];
  const means = meanMtByCategory(records);
  const counts = new Map<number, number>();
  for (const r of records) {
    counts.set(r.id_cat, (counts.get(r.id_cat) ?? 0) + 1);
  }
  return [...means.entries()].map(([category, mean]) => ({
    category,
    meanMt: formatSeconds(mean),
    trials: counts.get(category) ?? 0,
  }));
}
