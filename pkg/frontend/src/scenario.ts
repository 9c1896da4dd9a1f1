// Client-local scenario draft. Nothing here is persisted server-side; a
// draft only leaves the browser as the body of a propagate request.

import type { ModelJson, MoodValue, ScenarioBody } from './types.js';

export interface ScenarioDraft {
  /** Model revision the draft was edited against. */
  revision: number;
  /** Informal-edge activity toggles, keyed "src~>tgt". */
  activations: Map<string, boolean>;
  /** Mood overrides applied before round 1. */
  overrides: Map<string, MoodValue>;
  threshold: number | null;
  mode: 'adopt' | 'graded' | null;
  dirty: boolean;
}

export function emptyDraft(revision: number): ScenarioDraft {
  return {
    revision,
    activations: new Map(),
    overrides: new Map(),
    threshold: null,
    mode: null,
    dirty: false,
  };
}

export function edgeKey(source: string, target: string): string {
  return `${source}~>${target}`;
}

export function toggleEdge(draft: ScenarioDraft, source: string, target: string, active: boolean): ScenarioDraft {
  const activations = new Map(draft.activations);
  activations.set(edgeKey(source, target), active);
  return { ...draft, activations, dirty: true };
}

export function setOverride(draft: ScenarioDraft, entity: string, mood: MoodValue | null): ScenarioDraft {
  const overrides = new Map(draft.overrides);
  if (mood === null) {
    overrides.delete(entity);
  } else {
    overrides.set(entity, mood);
  }
  return { ...draft, overrides, dirty: true };
}

/** Request body for POST /api/propagate; omits everything left at default. */
export function draftToRequest(draft: ScenarioDraft): ScenarioBody {
  const body: ScenarioBody = {};
  if (draft.activations.size > 0) {
    body.activations = [...draft.activations.entries()].map(([key, active]) => {
      const [source, target] = key.split('~>');
      return { source, target, active };
    });
  }
  if (draft.overrides.size > 0) {
    body.overrides = Object.fromEntries(draft.overrides);
  }
  if (draft.threshold !== null || draft.mode !== null) {
    body.params = {};
    if (draft.threshold !== null) body.params.cascade_threshold = draft.threshold;
    if (draft.mode !== null) body.params.mode = draft.mode;
  }
  return body;
}

/** Draft references must exist in the model it was edited against. */
export function draftProblems(draft: ScenarioDraft, model: ModelJson): string[] {
  const problems: string[] = [];
  const edges = new Set(model.informal.map((e) => edgeKey(e.source, e.target)));
  for (const key of draft.activations.keys()) {
    if (!edges.has(key)) problems.push(`unknown informal edge ${key}`);
  }
  for (const entity of draft.overrides.keys()) {
    if (!(entity in model.entities)) problems.push(`unknown entity ${entity}`);
  }
  return problems;
}
