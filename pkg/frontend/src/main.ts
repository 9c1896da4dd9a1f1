// DOM wiring for the what-if explorer. The server-rendered SVG is the base
// layer (notation parity with the CLI renderer by construction); this file
// only animates overlays on top of it and talks to the local API.

import { ApiError, getAccess, getModel, getRank, getRenderedSvg, postPropagate } from './api.js';
import { LatestWins } from './gate.js';
import { accessOverlay, rankHighlight, rankRows, type RankRow } from './overlay.js';
import {
  buildPlayback,
  conflictTooltips,
  finalBadges,
  terminationLabel,
  type Playback,
} from './playback.js';
import {
  draftProblems,
  draftToRequest,
  edgeKey,
  emptyDraft,
  setOverride,
  toggleEdge,
  type ScenarioDraft,
} from './scenario.js';
import { MOOD_GLYPHS, type ModelJson, type MoodValue } from './types.js';

interface AppState {
  model: ModelJson | null;
  revision: number;
  draft: ScenarioDraft;
  playback: Playback | null;
  frameIndex: number;
  rank: RankRow[] | null;
}

const state: AppState = {
  model: null,
  revision: 0,
  draft: emptyDraft(0),
  playback: null,
  frameIndex: 0,
  rank: null,
};

const runGate = new LatestWins();
let runAbort: AbortController | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function banner(message: string | null, retry?: () => void): void {
  const box = el<HTMLDivElement>('banner');
  box.innerHTML = '';
  if (message === null) {
    box.hidden = true;
    return;
  }
  box.hidden = false;
  box.append(message);
  if (retry) {
    const button = document.createElement('button');
    button.textContent = 'Retry';
    button.addEventListener('click', retry);
    box.append(' ', button);
  }
}

// ---- canvas ----------------------------------------------------------------

function svgRoot(): SVGSVGElement | null {
  return el<HTMLDivElement>('canvas').querySelector('svg');
}

function entityGroup(entity: string): SVGGElement | null {
  const root = svgRoot();
  return root?.querySelector(`g[data-entity="${CSS.escape(entity)}"]`) ?? null;
}

function setGlyph(entity: string, mood: MoodValue): void {
  const group = entityGroup(entity);
  if (!group) return;
  group.setAttribute('data-mood', mood);
  const glyph = group.querySelector('.mood-glyph');
  if (glyph) glyph.textContent = MOOD_GLYPHS[mood];
}

function pulse(entity: string): void {
  const group = entityGroup(entity);
  if (!group) return;
  group.classList.remove('pulse');
  // restart the CSS animation
  void (group as unknown as HTMLElement).getBoundingClientRect();
  group.classList.add('pulse');
}

function clearCanvasClasses(...classes: string[]): void {
  const root = svgRoot();
  if (!root) return;
  for (const cls of classes) {
    root.querySelectorAll(`.${cls}`).forEach((node) => node.classList.remove(cls));
  }
  root.querySelectorAll('.overlay-path').forEach((node) => node.remove());
}

function paintMoods(moods: Record<string, MoodValue>): void {
  for (const [entity, mood] of Object.entries(moods)) {
    setGlyph(entity, mood);
  }
}

// ---- loading ----------------------------------------------------------------

async function loadModel(): Promise<void> {
  banner(null);
  try {
    const [modelResp, rendered] = await Promise.all([getModel(), getRenderedSvg()]);
    state.model = modelResp.model;
    state.revision = modelResp.revision;
    state.draft = emptyDraft(modelResp.revision);
    state.playback = null;
    state.rank = null;
    el<HTMLSpanElement>('revision').textContent = `revision ${modelResp.revision}`;
    el<HTMLSpanElement>('model-name').textContent = modelResp.model.name;
    const canvas = el<HTMLDivElement>('canvas');
    if (Object.keys(modelResp.model.entities).length === 0) {
      canvas.innerHTML =
        '<div class="empty-state">This organigram is empty. Add an entity with ' +
        '<code>entity A</code> in your .pog file and PUT it to /api/model.</div>';
    } else {
      canvas.innerHTML = rendered.svg;
    }
    renderScenarioPanel();
    renderBadges(null);
    renderPlaybackControls();
    void loadRank();
    renderAccessPanel();
  } catch (e) {
    state.model = null;
    el<HTMLDivElement>('canvas').innerHTML = '';
    banner(`Could not reach the polorg server (${(e as Error).message}).`, () => void loadModel());
  }
}

// ---- scenario panel ----------------------------------------------------------

function effectiveActive(source: string, target: string): boolean {
  const override = state.draft.activations.get(edgeKey(source, target));
  if (override !== undefined) return override;
  const edge = state.model?.informal.find((i) => i.source === source && i.target === target);
  return edge?.active ?? false;
}

function renderScenarioPanel(): void {
  const panel = el<HTMLDivElement>('scenario-panel');
  panel.innerHTML = '';
  const model = state.model;
  if (!model) return;

  const edgesHeading = document.createElement('h3');
  edgesHeading.textContent = 'Informal influences';
  panel.append(edgesHeading);
  if (model.informal.length === 0) {
    const none = document.createElement('p');
    none.className = 'hint';
    none.textContent = 'No informal edges in this model.';
    panel.append(none);
  }
  for (const edge of model.informal) {
    const row = document.createElement('label');
    row.className = 'toggle-row';
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.checked = effectiveActive(edge.source, edge.target);
    box.dataset.edge = edgeKey(edge.source, edge.target);
    box.addEventListener('change', () => {
      state.draft = toggleEdge(state.draft, edge.source, edge.target, box.checked);
    });
    row.append(box, ` ${edge.source} → ${edge.target} (strength ${edge.strength})`);
    panel.append(row);
  }

  const overridesHeading = document.createElement('h3');
  overridesHeading.textContent = 'Mood overrides';
  panel.append(overridesHeading);
  for (const entity of Object.keys(model.entities).sort()) {
    const row = document.createElement('label');
    row.className = 'override-row';
    const select = document.createElement('select');
    for (const option of ['—', 'happy', 'sad', 'neutral']) {
      const opt = document.createElement('option');
      opt.value = option === '—' ? '' : option;
      opt.textContent = option;
      select.append(opt);
    }
    select.addEventListener('change', () => {
      state.draft = setOverride(state.draft, entity, (select.value || null) as MoodValue | null);
    });
    row.append(`${entity} `, select);
    panel.append(row);
  }

  const paramsHeading = document.createElement('h3');
  paramsHeading.textContent = 'Parameters';
  panel.append(paramsHeading);
  const threshold = document.createElement('input');
  threshold.type = 'number';
  threshold.min = '1';
  threshold.placeholder = '2';
  threshold.id = 'threshold-input';
  threshold.addEventListener('change', () => {
    state.draft = { ...state.draft, threshold: threshold.value ? Number(threshold.value) : null, dirty: true };
  });
  const thresholdRow = document.createElement('label');
  thresholdRow.append('cascade threshold ', threshold);
  panel.append(thresholdRow);
  const mode = document.createElement('select');
  for (const option of ['adopt', 'graded']) {
    const opt = document.createElement('option');
    opt.value = option;
    opt.textContent = option;
    mode.append(opt);
  }
  mode.addEventListener('change', () => {
    state.draft = { ...state.draft, mode: mode.value as 'adopt' | 'graded', dirty: true };
  });
  const modeRow = document.createElement('label');
  modeRow.append('mode ', mode);
  panel.append(modeRow);

  const run = document.createElement('button');
  run.id = 'run-button';
  run.textContent = 'Run scenario';
  run.addEventListener('click', () => void runScenario());
  panel.append(run);
}

async function runScenario(): Promise<void> {
  const model = state.model;
  if (!model) return;
  const problems = draftProblems(state.draft, model);
  if (problems.length > 0) {
    banner(`Scenario refers to things not in this model: ${problems.join('; ')}. Reload and retry.`, () =>
      void loadModel(),
    );
    return;
  }
  const token = runGate.begin();
  runAbort?.abort();
  runAbort = new AbortController();
  try {
    const resp = await postPropagate(draftToRequest(state.draft), runAbort.signal);
    if (!runGate.isCurrent(token)) return; // a newer run superseded this one
    if (resp.revision !== state.revision) {
      banner('The model changed on the server since this draft was made. Reload to continue.', () =>
        void loadModel(),
      );
      return;
    }
    state.playback = buildPlayback(resp.trace, resp.revision);
    state.frameIndex = 0;
    showFrame(0);
    renderBadges(state.playback);
    renderPlaybackControls();
  } catch (e) {
    if ((e as DOMException).name === 'AbortError') return;
    if (!runGate.isCurrent(token)) return;
    const err = e as ApiError;
    if (err.diagnostics.length > 0) {
      banner(`Scenario rejected: ${err.diagnostics.map((d) => `${d.code} ${d.message}`).join('; ')}`);
    } else {
      banner(`Run failed: ${err.message}`, () => void runScenario());
    }
  }
}

// ---- playback -----------------------------------------------------------------

function showFrame(index: number): void {
  const playback = state.playback;
  if (!playback) return;
  state.frameIndex = Math.max(0, Math.min(index, playback.frames.length - 1));
  const frame = playback.frames[state.frameIndex];
  paintMoods(frame.moods);
  clearCanvasClasses('conflict');
  for (const entity of frame.pulsing) pulse(entity);
  for (const conflict of frame.conflicts) {
    entityGroup(conflict.entity)?.classList.add('conflict');
  }
  el<HTMLSpanElement>('frame-label').textContent =
    state.frameIndex === 0 ? 'initial' : `round ${frame.round} of ${playback.roundCount}`;
}

function renderPlaybackControls(): void {
  const bar = el<HTMLDivElement>('playback');
  bar.hidden = state.playback === null;
  if (!state.playback) return;
  el<HTMLSpanElement>('termination-label').textContent = terminationLabel(state.playback);
}

function renderBadges(playback: Playback | null): void {
  const list = el<HTMLUListElement>('badges');
  list.innerHTML = '';
  if (!playback) return;
  if (playback.badges.length === 0) {
    const item = document.createElement('li');
    item.className = 'hint';
    item.textContent = 'No changes.';
    list.append(item);
  }
  for (const badge of playback.badges) {
    const item = document.createElement('li');
    item.textContent = `${badge.entity}: ${MOOD_GLYPHS[badge.before]} → ${MOOD_GLYPHS[badge.after]} (${badge.before} → ${badge.after})`;
    list.append(item);
  }
  const tooltips = conflictTooltips(playback);
  for (const [entity, tooltip] of Object.entries(tooltips)) {
    const item = document.createElement('li');
    item.className = 'conflict-badge';
    item.title = tooltip;
    item.textContent = `${entity}: ${MOOD_GLYPHS.neutral} conflict`;
    const group = entityGroup(entity);
    if (group) {
      const title = document.createElementNS('http://www.w3.org/2000/svg', 'title');
      title.textContent = tooltip;
      group.append(title);
    }
    list.append(item);
  }
  // the parity check in tests mirrors this: what we paint is exactly trace.final
  paintMoods(finalBadges(playback));
}

// ---- ranking overlay -------------------------------------------------------------

async function loadRank(): Promise<void> {
  try {
    const resp = await getRank();
    if (resp.revision !== state.revision) return;
    state.rank = rankRows(resp);
    renderRankTable('score');
  } catch {
    state.rank = null;
  }
}

function renderRankTable(sortBy: 'score' | 'entity'): void {
  const table = el<HTMLTableElement>('rank-table');
  table.innerHTML = '';
  const rows = state.rank;
  if (!rows) return;
  const sorted = [...rows].sort((a, b) =>
    sortBy === 'score' ? b.score - a.score || a.entity.localeCompare(b.entity) : a.entity.localeCompare(b.entity),
  );
  const head = table.createTHead().insertRow();
  for (const [label, key] of [
    ['entity', 'entity'],
    ['score', 'score'],
    ['influences', ''],
  ] as const) {
    const cell = document.createElement('th');
    cell.textContent = label;
    if (key) cell.addEventListener('click', () => renderRankTable(key));
    head.append(cell);
  }
  const body = table.createTBody();
  for (const row of sorted) {
    const tr = body.insertRow();
    tr.insertCell().textContent = row.entity;
    tr.insertCell().textContent = String(row.score);
    tr.insertCell().textContent = row.influenceSet.join(', ') || '—';
    tr.addEventListener('click', () => {
      clearCanvasClasses('highlight');
      for (const entity of rankHighlight(rows, row.entity)) {
        entityGroup(entity)?.classList.add('highlight');
      }
    });
  }
}

// ---- access overlay ----------------------------------------------------------------

function renderAccessPanel(): void {
  const panel = el<HTMLDivElement>('access-panel');
  panel.innerHTML = '';
  const model = state.model;
  if (!model) return;
  const hint = document.createElement('p');
  hint.className = 'hint';
  hint.textContent = 'Pick entry points, then shade who is reachable.';
  panel.append(hint);
  const boxes: HTMLInputElement[] = [];
  for (const entity of Object.keys(model.entities).sort()) {
    const row = document.createElement('label');
    row.className = 'toggle-row';
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.value = entity;
    boxes.push(box);
    row.append(box, ` ${entity}`);
    panel.append(row);
  }
  const shade = document.createElement('button');
  shade.textContent = 'Shade access';
  shade.addEventListener('click', () => {
    const entries = boxes.filter((b) => b.checked).map((b) => b.value);
    void shadeAccess(entries);
  });
  const clear = document.createElement('button');
  clear.textContent = 'Clear';
  clear.addEventListener('click', () => clearCanvasClasses('shaded-blocked', 'highlight'));
  panel.append(shade, ' ', clear);
}

async function shadeAccess(entries: string[]): Promise<void> {
  if (entries.length === 0) {
    banner('Pick at least one entry entity for the access overlay.');
    return;
  }
  try {
    const resp = await getAccess(entries);
    if (resp.revision !== state.revision) {
      banner('The model changed on the server. Reload to continue.', () => void loadModel());
      return;
    }
    const overlay = accessOverlay(resp);
    clearCanvasClasses('shaded-blocked');
    for (const entity of overlay.blocked) {
      entityGroup(entity)?.classList.add('shaded-blocked');
    }
    for (const path of Object.values(overlay.workaroundPaths)) {
      drawOverlayPath(path);
    }
  } catch (e) {
    banner(`Access query failed: ${(e as Error).message}`);
  }
}

function drawOverlayPath(entities: string[]): void {
  const root = svgRoot();
  if (!root || entities.length < 2) return;
  const points: string[] = [];
  for (const entity of entities) {
    const circle = entityGroup(entity)?.querySelector('circle');
    if (!circle) return;
    points.push(`${circle.getAttribute('cx')},${circle.getAttribute('cy')}`);
  }
  const path = document.createElementNS('http://www.w3.org/2000/svg', 'polyline');
  path.setAttribute('points', points.join(' '));
  path.setAttribute('class', 'overlay-path');
  path.setAttribute('fill', 'none');
  root.append(path);
}

// ---- boot ------------------------------------------------------------------------

export function boot(): void {
  el<HTMLButtonElement>('step-button').addEventListener('click', () => showFrame(state.frameIndex + 1));
  el<HTMLButtonElement>('rewind-button').addEventListener('click', () => showFrame(0));
  void loadModel();
}

if (typeof document !== 'undefined' && document.getElementById('canvas')) {
  boot();
}
