import { ApiClient } from '../api.js';
import { categoryStatus, SessionFlow, selectionKey } from '../flow.js';
import type { Demographics, FavouriteKind, Selection } from '../types.js';

const api = new ApiClient('');
const flow = new SessionFlow(api);

interface CategoryTab {
  key: string; // 'item' or an attribute type
  label: string;
  required: boolean;
}

const TABS: CategoryTab[] = [
  { key: 'item', label: 'Movies', required: true },
  { key: 'genre', label: 'Genres', required: true },
  { key: 'actor', label: 'Actors', required: true },
  { key: 'director', label: 'Directors', required: true },
  { key: 'production_company', label: 'Companies', required: false },
  { key: 'production_country', label: 'Countries', required: false },
  { key: 'producer', label: 'Producers', required: false },
  { key: 'screenwriter', label: 'Writers', required: false },
  { key: 'release_year', label: 'Years', required: false },
  { key: 'sound_crew', label: 'Sound', required: false },
];

let activeTab = 'item';
let searchText = '';
let searchResults: Selection[] = [];
let searchToken = 0;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function debounce<A extends unknown[]>(fn: (...args: A) => void, ms: number) {
  let handle: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    clearTimeout(handle);
    handle = setTimeout(() => fn(...args), ms);
  };
}

async function runSearch(): Promise<void> {
  const token = ++searchToken;
  const tab = activeTab;
  try {
    let results: Selection[];
    if (tab === 'item') {
      const hits = await api.searchItems(searchText, 8);
      results = hits.map((h) => ({
        kind: 'item' as FavouriteKind,
        targetId: h.item_id,
        label: h.title,
        category: 'item',
      }));
    } else {
      const hits = await api.searchFeatures(tab, searchText, 8);
      results = hits.map((h) => ({
        kind: 'feature' as FavouriteKind,
        targetId: h.feature_id,
        label: h.label,
        category: tab,
      }));
    }
    if (token === searchToken && tab === activeTab) {
      searchResults = results;
      render();
    }
  } catch {
    // Stale or failed searches are silently dropped; picks are never lost.
  }
}

const searchSoon = debounce(runSearch, 250);

function renderError(root: HTMLElement): void {
  const { error } = flow.state;
  if (!error) return;
  const banner = el('div', { class: 'banner', role: 'alert' });
  banner.appendChild(el('span', {}, error));
  if (flow.state.phase === 'collecting') {
    const retry = el('button', {}, 'Retry');
    retry.addEventListener('click', () => void flow.sync().catch(() => undefined));
    banner.appendChild(retry);
  }
  root.appendChild(banner);
}

function renderDemographics(root: HTMLElement): void {
  const form = el('form', { class: 'card' });
  form.appendChild(el('h2', {}, 'About you'));
  const source = el('select', { name: 'source' });
  source.append(new Option('I was invited (volunteer)', 'volunteer'),
                new Option('I am a crowd worker', 'crowdsourced'));
  const age = el('select', { name: 'age_range' });
  for (const bucket of ['', '18-24', '25-34', '35-44', '45-54', '55+']) {
    age.append(new Option(bucket || 'prefer not to say', bucket));
  }
  const gender = el('select', { name: 'gender' });
  for (const g of ['unspecified', 'female', 'male']) {
    gender.append(new Option(g === 'unspecified' ? 'prefer not to say' : g, g));
  }
  const country = el('input', { name: 'country', placeholder: 'country code, e.g. IT' });
  const go = el('button', { type: 'submit' }, 'Start picking favourites');
  for (const [label, control] of [
    ['How did you get here?', source],
    ['Age range', age],
    ['Gender', gender],
    ['Country', country],
  ] as const) {
    const row = el('label', { class: 'field' });
    row.appendChild(el('span', {}, label));
    row.appendChild(control);
    form.appendChild(row);
  }
  form.appendChild(go);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const demographics: Demographics = {
      source: source.value as Demographics['source'],
      age_range: age.value,
      gender: gender.value as Demographics['gender'],
      country: country.value.trim(),
    };
    void flow.start(demographics).catch(() => undefined);
  });
  root.appendChild(form);
}

function renderPicker(root: HTMLElement): void {
  const state = flow.state;
  const card = el('div', { class: 'card' });
  card.appendChild(el('h2', {}, 'Pick your favourites'));
  card.appendChild(
    el('p', { class: 'hint' },
       'Meet every minimum below; feel free to add more than the minimum.'),
  );

  const badges = el('div', { class: 'badges' });
  for (const status of categoryStatus(state.counts, state.minimums)) {
    const tab = TABS.find((t) => t.key === status.category);
    badges.appendChild(
      el('span', { class: `badge ${status.met ? 'met' : 'pending'}` },
         `${tab ? tab.label : status.category} ${status.count}/${status.minimum}`),
    );
  }
  card.appendChild(badges);

  const tabs = el('nav', { class: 'tabs' });
  for (const tab of TABS) {
    const button = el('button', { type: 'button' }, tab.label);
    if (tab.key === activeTab) button.classList.add('active');
    button.addEventListener('click', () => {
      activeTab = tab.key;
      searchText = '';
      searchResults = [];
      render();
      void runSearch();
    });
    tabs.appendChild(button);
  }
  card.appendChild(tabs);

  const search = el('input', {
    class: 'search',
    placeholder: 'type to search…',
    value: searchText,
  });
  search.addEventListener('input', () => {
    searchText = search.value;
    searchSoon();
  });
  card.appendChild(search);

  const results = el('ul', { class: 'results' });
  const selectedKeys = new Set(state.selections.map((s) => selectionKey(s.kind, s.targetId)));
  for (const hit of searchResults) {
    const row = el('li');
    const button = el('button', { type: 'button' }, hit.label);
    if (selectedKeys.has(selectionKey(hit.kind, hit.targetId))) button.classList.add('picked');
    button.addEventListener('click', () => void flow.toggleSelection(hit).catch(() => undefined));
    row.appendChild(button);
    results.appendChild(row);
  }
  card.appendChild(results);

  const chips = el('div', { class: 'chips' });
  for (const s of state.selections.filter((s) => s.category === activeTab)) {
    const chip = el('button', { class: 'chip', type: 'button' }, `${s.label} ✕`);
    chip.addEventListener('click', () => void flow.toggleSelection(s).catch(() => undefined));
    chips.appendChild(chip);
  }
  card.appendChild(chips);

  const go = el('button', { class: 'primary', type: 'button' }, 'Continue to the memory test');
  go.disabled = !state.minimumsMet || state.syncing;
  go.addEventListener('click', () => void flow.beginTest().catch(() => undefined));
  card.appendChild(go);
  root.appendChild(card);
}

function renderTest(root: HTMLElement): void {
  const state = flow.state;
  const card = el('div', { class: 'card' });
  card.appendChild(el('h2', {}, 'Which of these did you pick?'));
  card.appendChild(
    el('p', { class: 'hint' },
       'Select again all (and only) the favourites you remember adding.'),
  );
  const list = el('ul', { class: 'sheet' });
  for (const entry of state.sheet ?? []) {
    const key = selectionKey(entry.kind, entry.target_id);
    const row = el('li');
    const label = el('label');
    const box = el('input', { type: 'checkbox' }) as HTMLInputElement;
    box.checked = state.picked.includes(key);
    box.addEventListener('change', () => flow.togglePick(entry));
    label.appendChild(box);
    label.appendChild(el('span', {}, `${entry.label} (${entry.kind === 'item' ? 'movie' : 'feature'})`));
    row.appendChild(label);
    list.appendChild(row);
  }
  card.appendChild(list);
  if (state.picked.length === 0) {
    card.appendChild(el('p', { class: 'hint' }, 'No selections yet — you can still submit.'));
  }
  const submit = el('button', { class: 'primary', type: 'button' }, 'Submit test');
  submit.addEventListener('click', () => void flow.submit().catch(() => undefined));
  card.appendChild(submit);
  root.appendChild(card);
}

function renderResult(root: HTMLElement): void {
  const verdict = flow.state.verdict;
  const card = el('div', { class: 'card' });
  card.appendChild(el('h2', {}, 'All done — thank you!'));
  if (verdict) {
    card.appendChild(
      el('p', {}, verdict.precision === null
        ? 'You made no selections, so no precision score was computed.'
        : `Memory test precision: ${(verdict.precision * 100).toFixed(0)}%`),
    );
    card.appendChild(
      el('p', { class: verdict.reliable ? 'ok' : 'warn' },
         verdict.reliable
           ? 'Your contribution counts as reliable.'
           : 'Your contribution did not meet the reliability bar.'),
    );
  }
  root.appendChild(card);
}

function render(): void {
  const root = document.getElementById('app');
  if (!root) return;
  root.innerHTML = '';
  renderError(root);
  switch (flow.state.phase) {
    case 'demographics':
      renderDemographics(root);
      break;
    case 'collecting':
      renderPicker(root);
      break;
    case 'testing':
      renderTest(root);
      break;
    case 'submitted':
      renderResult(root);
      break;
  }
}

const SESSION_KEY = 'profilebench.session';

flow.store.subscribe(() => {
  const state = flow.state;
  if (state.phase === 'testing' && state.sessionId) {
    localStorage.setItem(SESSION_KEY, state.sessionId);
  } else if (state.phase === 'submitted') {
    localStorage.removeItem(SESSION_KEY);
  }
});
flow.store.subscribe(render);
render();
void runSearch();

const saved = localStorage.getItem(SESSION_KEY);
if (saved) {
  void flow.resume(saved).then((resumed) => {
    if (!resumed) localStorage.removeItem(SESSION_KEY);
  });
}
