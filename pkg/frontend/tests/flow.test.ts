import { describe, expect, it } from 'vitest';

import { ApiError, type CollectApi } from '../src/api.js';
import { categoryStatus, countsBy, SessionFlow, toggle } from '../src/flow.js';
import type { Selection, SessionStatus } from '../src/types.js';

const MINIMUMS = { item: 5, genre: 2, actor: 3, director: 1 };

function sel(category: string, id: string): Selection {
  return {
    kind: category === 'item' ? 'item' : 'feature',
    targetId: id,
    label: `Label ${id}`,
    category,
  };
}

function statusFor(selections: { kind: string; target_id: string }[]): SessionStatus {
  // The stub counts items only; fine-grained typing is the real server's job.
  const counts: Record<string, number> = { item: 0, genre: 0, actor: 0, director: 0 };
  for (const f of selections) {
    if (f.kind === 'item') counts.item = (counts.item ?? 0) + 1;
    else {
      const category = f.target_id.startsWith('g')
        ? 'genre'
        : f.target_id.startsWith('a')
          ? 'actor'
          : 'director';
      counts[category] = (counts[category] ?? 0) + 1;
    }
  }
  const met = Object.entries(MINIMUMS).every(([k, min]) => (counts[k] ?? 0) >= min);
  return {
    session_id: 's1',
    state: 'collecting',
    source: 'volunteer',
    favourites: selections as SessionStatus['favourites'],
    counts,
    minimums: MINIMUMS,
    minimums_met: met,
  };
}

function stubApi(overrides: Partial<CollectApi> = {}): CollectApi {
  return {
    health: async () => ({ status: 'ok' }),
    searchFeatures: async () => [],
    searchItems: async () => [],
    createSession: async () => statusFor([]),
    getSession: async () => statusFor([]),
    putFavourites: async (_id, favourites) => statusFor(favourites),
    beginTest: async () => ({
      session_id: 's1',
      state: 'testing',
      sheet: [
        { kind: 'item', target_id: 'mv01', label: 'One' },
        { kind: 'item', target_id: 'mv02', label: 'Two' },
        { kind: 'feature', target_id: 'g1', label: 'Action' },
      ],
    }),
    submitTest: async (_id, selections) => ({
      session_id: 's1',
      state: 'submitted',
      user_id: 's1',
      precision: selections.length ? 1.0 : null,
      reliable: selections.length > 0,
    }),
    ...overrides,
  };
}

describe('selection toggling', () => {
  it('re-selecting an element removes it (set semantics)', () => {
    const a = sel('genre', 'g1');
    let selections = toggle([], a);
    expect(selections).toHaveLength(1);
    selections = toggle(selections, sel('genre', 'g1'));
    expect(selections).toHaveLength(0);
  });

  it('counts selections per category', () => {
    const selections = [sel('item', 'mv1'), sel('item', 'mv2'), sel('genre', 'g1')];
    expect(countsBy(selections)).toEqual({ item: 2, genre: 1 });
  });

  it('flags categories as met only at or above the minimum', () => {
    const status = categoryStatus({ item: 5, genre: 1 }, MINIMUMS);
    const byCategory = Object.fromEntries(status.map((s) => [s.category, s.met]));
    expect(byCategory).toEqual({ item: true, genre: false, actor: false, director: false });
  });
});

describe('session flow', () => {
  async function collect(flow: SessionFlow, selections: Selection[]): Promise<void> {
    for (const s of selections) await flow.toggleSelection(s);
  }

  const fullPick = [
    ...['mv01', 'mv02', 'mv03', 'mv04', 'mv05'].map((id) => sel('item', id)),
    sel('genre', 'g1'),
    sel('genre', 'g2'),
    sel('actor', 'a1'),
    sel('actor', 'a2'),
    sel('actor', 'a3'),
    sel('director', 'd1'),
  ];

  it('gates the continue control on the server verdict', async () => {
    const flow = new SessionFlow(stubApi());
    await flow.start({ source: 'volunteer', age_range: '', gender: 'unspecified', country: '' });
    expect(flow.state.phase).toBe('collecting');
    expect(flow.state.minimumsMet).toBe(false);

    await collect(flow, fullPick.slice(0, 10));
    expect(flow.state.minimumsMet).toBe(false); // director still missing
    await flow.toggleSelection(fullPick[10]!);
    expect(flow.state.minimumsMet).toBe(true);

    // Removing below a minimum disables continue again.
    await flow.toggleSelection(sel('item', 'mv05'));
    expect(flow.state.minimumsMet).toBe(false);
  });

  it('keeps selections and surfaces a retryable error on network failure', async () => {
    let failNext = true;
    const api = stubApi({
      putFavourites: async (_id, favourites) => {
        if (failNext) throw new ApiError(0, 'connection refused');
        return statusFor(favourites);
      },
    });
    const flow = new SessionFlow(api);
    await flow.start({ source: 'volunteer', age_range: '', gender: 'unspecified', country: '' });
    await expect(flow.toggleSelection(sel('genre', 'g1'))).rejects.toThrow();
    expect(flow.state.error).toContain('network failure');
    expect(flow.state.selections).toHaveLength(1); // nothing lost
    failNext = false;
    await flow.sync(); // the retry affordance
    expect(flow.state.error).toBeNull();
    expect(flow.state.counts.genre).toBe(1);
  });

  it('runs the test phase and displays only the server verdict', async () => {
    const flow = new SessionFlow(stubApi());
    await flow.start({ source: 'crowdsourced', age_range: '', gender: 'unspecified', country: '' });
    await collect(flow, fullPick);
    await flow.beginTest();
    expect(flow.state.phase).toBe('testing');
    const sheet = flow.state.sheet!;
    flow.togglePick(sheet[0]!);
    flow.togglePick(sheet[2]!);
    flow.togglePick(sheet[2]!); // toggles back off
    const verdict = await flow.submit();
    expect(flow.state.phase).toBe('submitted');
    expect(verdict.precision).toBe(1.0);
    expect(flow.state.verdict).toEqual(verdict);
  });

  it('resumes a testing-phase session with the same sheet', async () => {
    const api = stubApi({
      getSession: async () => ({ ...statusFor([]), state: 'testing' as const }),
    });
    const flow = new SessionFlow(api);
    expect(await flow.resume('s1')).toBe(true);
    expect(flow.state.phase).toBe('testing');
    expect(flow.state.sheet).toHaveLength(3);
  });

  it('refuses to resume a submitted session', async () => {
    const api = stubApi({
      getSession: async () => ({ ...statusFor([]), state: 'submitted' as const }),
    });
    const flow = new SessionFlow(api);
    expect(await flow.resume('s1')).toBe(false);
    expect(flow.state.phase).toBe('demographics');
  });

  it('surfaces service rejections as blocking errors', async () => {
    const api = stubApi({
      beginTest: async () => {
        throw new ApiError(422, { error: 'minimum favourites not met' });
      },
    });
    const flow = new SessionFlow(api);
    await flow.start({ source: 'volunteer', age_range: '', gender: 'unspecified', country: '' });
    await expect(flow.beginTest()).rejects.toThrow();
    expect(flow.state.error).toContain('422');
    expect(flow.state.phase).toBe('collecting');
  });
});
