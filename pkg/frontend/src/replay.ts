/**
 * Trial-log parsing and replay. The log format is the service's
 * JSON-lines schema: one record per line with a fixed field set.
 */

export interface TrialRecord {
  method: string;
  block: number;
  trial: number;
  dir: number;
  D_m: number;
  W_m: number;
  id: number;
  id_cat: number;
  mt_s: number;
  misses: number;
  hit: boolean;
  seed: number;
  subject: number;
}

export class LogParseError extends Error {}

const NUMERIC_FIELDS = [
  "block", "trial", "dir", "D_m", "W_m", "id", "id_cat", "mt_s", "misses", "seed", "subject",
] as const;

export function parseTrialLog(text: string): TrialRecord[] {
  const records: TrialRecord[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line.length === 0) continue;
    let obj: Record<string, unknown>;
    try {
      obj = JSON.parse(line);
    } catch {
      throw new LogParseError(`malformed log line ${i + 1}`);
    }
    if (typeof obj !== "object" || obj === null) {
      throw new LogParseError(`log line ${i + 1} is not an object`);
    }
    if (typeof obj.method !== "string") {
      throw new LogParseError(`log line ${i + 1}: missing method`);
    }
    if (typeof obj.hit !== "boolean") {
      throw new LogParseError(`log line ${i + 1}: missing hit flag`);
    }
    for (const field of NUMERIC_FIELDS) {
      if (typeof obj[field] !== "number" || !Number.isFinite(obj[field] as number)) {
        throw new LogParseError(`log line ${i + 1}: missing numeric ${field}`);
      }
    }
    records.push(obj as unknown as TrialRecord);
  }
  return records;
}

/** Mean movement time per ID category, for the session summary panel. */
export function meanMtByCategory(records: TrialRecord[]): Map<number, number> {
  const sums = new Map<number, { total: number; n: number }>();
  for (const r of records) {
    const cell = sums.get(r.id_cat) ?? { total: 0, n: 0 };
    cell.total += r.mt_s;
    cell.n += 1;
    sums.set(r.id_cat, cell);
  }
  const means = new Map<number, number>();
  for (const [cat, { total, n }] of [...sums.entries()].sort((a, b) => a[0] - b[0])) {
    means.set(cat, total / n);
  }
  return means;
}

/** Steps through a loaded log one record at a time (read-only replay). */
export class ReplayPlayer {
  private index = 0;

  constructor(readonly records: TrialRecord[]) {}

  get done(): boolean {
    return this.index >= this.records.length;
  }

  get position(): number {
    return this.index;
  }

  current(): TrialRecord | null {
    return this.done ? null : this.records[this.index];
  }

  advance(): TrialRecord | null {
    if (this.done) return null;
    return this.records[this.index++];
  }

  reset(): void {
    this.index = 0;
  }
}
