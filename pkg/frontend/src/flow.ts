import { ApiError, type CollectApi } from './api.js';
import { Store } from './store.js';
import type { Demographics, Selection, SheetEntry, Verdict } from './types.js';

export type Phase = 'demographics' | 'collecting' | 'testing' | 'submitted';

export interface UiState {
  phase: Phase;
  sessionId: string | null;
  source: Demographics['source'] | null;
  selections: Selection[];
  /** Local optimistic counts per category; reconciled from the service. */
  counts: Record<string, number>;
  minimums: Record<string, number>;
  /** Server-confirmed; the continue control keys off this, never local math. */
  minimumsMet: boolean;
  syncing: boolean;
  sheet: SheetEntry[] | null;
  picked: string[];
  verdict: Verdict | null;
  error: string | null;
}

export const initialState: UiState = {
  phase: 'demographics',
  sessionId: null,
  source: null,
  selections: [],
  counts: {},
  minimums: {},
  minimumsMet: false,
  syncing: false,
  sheet: null,
  picked: [],
  verdict: null,
  error: null,
};

export function selectionKey(kind: string, targetId: string): string {
  return `${kind}:${targetId}`;
}

/** Set semantics: picking an already-selected element removes it. */
export function toggle(selections: Selection[], selection: Selection): Selection[] {
  const key = selectionKey(selection.kind, selection.targetId);
  const without = selections.filter((s) => selectionKey(s.kind, s.targetId) !== key);
  return without.length === selections.length ? [...selections, selection] : without;
}

export function countsBy(selections: Selection[]): Record<string, number> {
  const counts: Record<string, number> = {};
  for (const s of selections) counts[s.category] = (counts[s.category] ?? 0) + 1;
  return counts;
}

export interface CategoryStatus {
  category: string;
  count: number;
  minimum: number;
  met: boolean;
}

export function categoryStatus(
  counts: Record<string, number>,
  minimums: Record<string, number>,
): CategoryStatus[] {
  return Object.entries(minimums).map(([category, minimum]) => {
    const count = counts[category] ?? 0;
    return { category, count, minimum, met: count >= minimum };
  });
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    if (error.status === 0) return `network failure: ${String(error.detail)}`;
    const detail = typeof error.detail === 'string' ? error.detail : JSON.stringify(error.detail);
    return `service error ${error.status}: ${detail}`;
  }
  return String(error);
}

/**
 * Drives one participant session against the service.  All verdict numbers
 * (precision, reliability) come from the service; the UI only displays them.
 */
export class SessionFlow {
  readonly store = new Store<UiState>(initialState);

  constructor(private readonly api: CollectApi) {}

  get state(): UiState {
    return this.store.get();
  }

  async start(demographics: Demographics): Promise<void> {
    try {
      const session = await this.api.createSession(demographics);
      this.store.set({
        phase: 'collecting',
        sessionId: session.session_id,
        source: demographics.source,
        minimums: session.minimums,
        minimumsMet: session.minimums_met,
        error: null,
      });
    } catch (error) {
      this.store.set({ error: describe(error) });
      throw error;
    }
  }

  /**
   * Pick a testing-phase session back up (e.g. after a page reload); the
   * service re-serves the identical seeded sheet.  Returns false when the
   * session is unknown or not in the testing phase.
   */
  async resume(sessionId: string): Promise<boolean> {
    try {
      const status = await this.api.getSession(sessionId);
      if (status.state !== 'testing') return false;
      const response = await this.api.beginTest(sessionId);
      this.store.set({
        phase: 'testing',
        sessionId,
        source: status.source,
        minimums: status.minimums,
        minimumsMet: status.minimums_met,
        sheet: response.sheet,
        picked: [],
        error: null,
      });
      return true;
    } catch {
      return false;
    }
  }

  /** Toggle locally, then reconcile counts and the continue-gate from the service. */
  async toggleSelection(selection: Selection): Promise<void> {
    const selections = toggle(this.state.selections, selection);
    this.store.set({ selections, counts: countsBy(selections), syncing: true });
    await this.sync();
  }

  /** Re-send the current selections; used by the retry affordance. */
  async sync(): Promise<void> {
    const { sessionId, selections } = this.state;
    if (!sessionId) throw new Error('no session');
    try {
      const session = await this.api.putFavourites(
        sessionId,
        selections.map((s) => ({ kind: s.kind, target_id: s.targetId })),
      );
      this.store.set({
        counts: countsFromServer(session.counts),
        minimumsMet: session.minimums_met,
        syncing: false,
        error: null,
      });
    } catch (error) {
      // Selections stay in the store so a retry loses nothing.
      this.store.set({ syncing: false, error: describe(error) });
      throw error;
    }
  }

  async beginTest(): Promise<void> {
    const { sessionId } = this.state;
    if (!sessionId) throw new Error('no session');
    try {
      const response = await this.api.beginTest(sessionId);
      this.store.set({ phase: 'testing', sheet: response.sheet, picked: [], error: null });
    } catch (error) {
      this.store.set({ error: describe(error) });
      throw error;
    }
  }

  togglePick(entry: SheetEntry): void {
    const key = selectionKey(entry.kind, entry.target_id);
    const picked = this.state.picked.includes(key)
      ? this.state.picked.filter((k) => k !== key)
      : [...this.state.picked, key];
    this.store.set({ picked });
  }

  async submit(): Promise<Verdict> {
    const { sessionId, sheet, picked } = this.state;
    if (!sessionId || !sheet) throw new Error('no test in progress');
    const selections = sheet
      .filter((entry) => picked.includes(selectionKey(entry.kind, entry.target_id)))
      .map((entry) => ({ kind: entry.kind, target_id: entry.target_id }));
    try {
      const verdict = await this.api.submitTest(sessionId, selections);
      this.store.set({ phase: 'submitted', verdict, error: null });
      return verdict;
    } catch (error) {
      this.store.set({ error: describe(error) });
      throw error;
    }
  }
}

function countsFromServer(counts: Record<string, number>): Record<string, number> {
  return { ...counts };
}
