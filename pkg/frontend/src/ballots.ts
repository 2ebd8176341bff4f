/**
 * Ballot-entry drafts for the five UI modes, and their payload encoders.
 *
 * Column drafts hold ordered rows of tied alternatives; dropping an item
 * between rows inserts a new singleton row, dropping it onto a row merges
 * it into that tied group.  The two-column draft keeps an extra unranked
 * pool on the right; pool items are omitted from the payload and the
 * server appends them as one tied bottom group.
 */

import type { BallotPayload, Ranking } from "./types.js";

export class DraftError extends Error {}

function removeFromGroups(rows: string[][], id: string): void {
  for (const row of rows) {
    const at = row.indexOf(id);
    if (at >= 0) {
      row.splice(at, 1);
      return;
    }
  }
}

function dropEmptyRows(rows: string[][]): void {
  for (let i = rows.length - 1; i >= 0; i--) {
    if (rows[i]!.length === 0) rows.splice(i, 1);
  }
}

function checkRanking(ranking: Ranking, universe: string[], requireFull: boolean): void {
  const seen = new Set<string>();
  for (const group of ranking) {
    if (group.length === 0) throw new DraftError("empty tied group");
    for (const id of group) {
      if (!universe.includes(id)) throw new DraftError(`unknown alternative ${id}`);
      if (seen.has(id)) throw new DraftError(`alternative ${id} appears twice`);
      seen.add(id);
    }
  }
  if (requireFull && seen.size !== universe.length) {
    const missing = universe.filter((id) => !seen.has(id));
    throw new DraftError(`ranking must cover everything; missing ${missing.join(",")}`);
  }
}

/** Mirror of the server's normalisation: unranked ids become one tied
 * bottom group. */
export function normalizeWithUnranked(ranking: Ranking, universe: string[]): Ranking {
  const ranked = new Set(ranking.flat());
  const missing = universe.filter((id) => !ranked.has(id));
  const groups = ranking.map((g) => [...g]);
  if (missing.length > 0) groups.push(missing);
  return groups;
}

// ---------------------------------------------------------------------------
// one-column

export class OneColumnDraft {
  readonly alternatives: string[];
  private rows: string[][];

  constructor(alternatives: string[], initial?: Ranking) {
    this.alternatives = [...alternatives];
    if (initial !== undefined) {
      checkRanking(initial, this.alternatives, true);
      this.rows = initial.map((g) => [...g]);
    } else {
      this.rows = alternatives.map((id) => [id]);
    }
  }

  get rowCount(): number {
    return this.rows.length;
  }

  view(): Ranking {
    return this.rows.map((g) => [...g]);
  }

  private checkKnown(id: string): void {
    if (!this.alternatives.includes(id)) throw new DraftError(`unknown alternative ${id}`);
  }

  /** Drag an item into the gap above row `gap` (0..rowCount); it becomes
   * its own rank. */
  dropBetween(id: string, gap: number): void {
    this.checkKnown(id);
    const slot = Math.max(0, Math.min(gap, this.rows.length));
    removeFromGroups(this.rows, id);
    this.rows.splice(slot, 0, [id]);
    dropEmptyRows(this.rows);
  }

  /** Drag an item onto row `row`; it ties with that group. */
  dropOnto(id: string, row: number): void {
    this.checkKnown(id);
    if (row < 0 || row >= this.rows.length) throw new DraftError(`no row ${row}`);
    const target = this.rows[row]!;
    if (target.includes(id)) return;
    removeFromGroups(this.rows, id);
    target.push(id);
    target.sort();
    dropEmptyRows(this.rows);
  }

  encode(): { ranking: Ranking } {
    const ranking = this.view();
    checkRanking(ranking, this.alternatives, true);
    return { ranking };
  }
}

// ---------------------------------------------------------------------------
// two-column

export class TwoColumnDraft {
  readonly alternatives: string[];
  private rows: string[][];
  private pool: string[];

  constructor(alternatives: string[], initial?: Ranking) {
    this.alternatives = [...alternatives];
    this.rows = [];
    this.pool = [...alternatives];
    if (initial !== undefined) {
      checkRanking(initial, this.alternatives, false);
      this.rows = initial.map((g) => [...g]);
      const ranked = new Set(initial.flat());
      this.pool = this.alternatives.filter((id) => !ranked.has(id));
    }
  }

  view(): { ranked: Ranking; unranked: string[] } {
    return { ranked: this.rows.map((g) => [...g]), unranked: [...this.pool] };
  }

  private take(id: string): void {
    if (!this.alternatives.includes(id)) throw new DraftError(`unknown alternative ${id}`);
    const at = this.pool.indexOf(id);
    if (at >= 0) this.pool.splice(at, 1);
    else removeFromGroups(this.rows, id);
  }

  /** Clicking a right-column item appends it as a new bottom rank. */
  clickRank(id: string): void {
    this.take(id);
    this.rows.push([id]);
    dropEmptyRows(this.rows);
  }

  dropBetween(id: string, gap: number): void {
    this.take(id);
    const slot = Math.max(0, Math.min(gap, this.rows.length));
    this.rows.splice(slot, 0, [id]);
    dropEmptyRows(this.rows);
  }

  dropOnto(id: string, row: number): void {
    if (row < 0 || row >= this.rows.length) throw new DraftError(`no row ${row}`);
    if (this.rows[row]!.includes(id)) return;
    this.take(id);
    this.rows[row]!.push(id);
    this.rows[row]!.sort();
    dropEmptyRows(this.rows);
  }

  /** Send an item back to the unranked pool. */
  unrank(id: string): void {
    this.take(id);
    this.pool.push(id);
    dropEmptyRows(this.rows);
  }

  /** Pool items are omitted; the server appends them as a tied bottom group. */
  encode(): { ranking: Ranking } {
    const ranking = this.rows.map((g) => [...g]);
    checkRanking(ranking, this.alternatives, false);
    return { ranking };
  }
}

// ---------------------------------------------------------------------------
// cardinal (sliders 0..100, stars 0..10)

export function deriveCardinalRanking(values: Record<string, number>): Ranking {
  const byValue = new Map<number, string[]>();
  for (const [id, value] of Object.entries(values)) {
    const group = byValue.get(value);
    if (group) group.push(id);
    else byValue.set(value, [id]);
  }
  return [...byValue.entries()]
    .sort((a, b) => b[0] - a[0])
    .map(([, group]) => group.sort());
}

export class CardinalDraft {
  readonly alternatives: string[];
  readonly top: number;
  private values: Record<string, number>;

  constructor(alternatives: string[], mode: "sliders" | "stars", initial?: Record<string, number>) {
    this.alternatives = [...alternatives];
    this.top = mode === "sliders" ? 100 : 10;
    this.values = {};
    for (const id of alternatives) this.values[id] = 0;
    if (initial) for (const [id, v] of Object.entries(initial)) this.setValue(id, v);
  }

  setValue(id: string, value: number): void {
    if (!this.alternatives.includes(id)) throw new DraftError(`unknown alternative ${id}`);
    if (!Number.isFinite(value) || value < 0 || value > this.top) {
      throw new DraftError(`value for ${id} must lie in 0..${this.top}`);
    }
    this.values[id] = value;
  }

  encode(): { values: Record<string, number>; derived: Ranking } {
    return { values: { ...this.values }, derived: deriveCardinalRanking(this.values) };
  }
}

// ---------------------------------------------------------------------------
// yes/no approval

export class YesNoDraft {
  readonly alternatives: string[];
  private approvedSet: Set<string>;

  constructor(alternatives: string[], initial?: string[]) {
    this.alternatives = [...alternatives];
    this.approvedSet = new Set();
    for (const id of initial ?? []) this.toggle(id);
  }

  toggle(id: string): void {
    if (!this.alternatives.includes(id)) throw new DraftError(`unknown alternative ${id}`);
    if (this.approvedSet.has(id)) this.approvedSet.delete(id);
    else this.approvedSet.add(id);
  }

  /** None or all approved is submittable but aggregation-neutral; the UI
   * flags it. */
  get degenerate(): boolean {
    return this.approvedSet.size === 0 || this.approvedSet.size === this.alternatives.length;
  }

  encode(): { approved: string[] } {
    return { approved: this.alternatives.filter((id) => this.approvedSet.has(id)) };
  }
}

export type Draft = OneColumnDraft | TwoColumnDraft | CardinalDraft | YesNoDraft;

export function encodePayload(draft: Draft): BallotPayload {
  if (draft instanceof CardinalDraft) {
    return { values: draft.encode().values };
  }
  return draft.encode();
}
