import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { LatestWins } from '../src/gate.js';
import {
  draftProblems,
  draftToRequest,
  emptyDraft,
  setOverride,
  toggleEdge,
} from '../src/scenario.js';
import type { ModelResponse } from '../src/types.js';

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(__dirname, 'fixtures', name), 'utf-8')) as T;
}

const model = fixture<ModelResponse>('model.json').model;

describe('scenario drafts', () => {
  it('starts clean and empty', () => {
    const draft = emptyDraft(1);
    expect(draft.dirty).toBe(false);
    expect(draftToRequest(draft)).toEqual({});
  });

  it('serializes toggles, overrides and params', () => {
    let draft = emptyDraft(1);
    draft = toggleEdge(draft, 'D', 'A', true);
    draft = setOverride(draft, 'C', 'sad');
    draft = { ...draft, threshold: 3, mode: 'graded', dirty: true };
    expect(draftToRequest(draft)).toEqual({
      activations: [{ source: 'D', target: 'A', active: true }],
      overrides: { C: 'sad' },
      params: { cascade_threshold: 3, mode: 'graded' },
    });
  });

  it('clearing an override removes it', () => {
    let draft = setOverride(emptyDraft(1), 'C', 'sad');
    draft = setOverride(draft, 'C', null);
    expect(draftToRequest(draft)).toEqual({});
  });

  it('accepts only edges and entities of the fetched model', () => {
    let draft = toggleEdge(emptyDraft(1), 'D', 'A', false);
    expect(draftProblems(draft, model)).toEqual([]);
    draft = toggleEdge(draft, 'A', 'D', true);
    draft = setOverride(draft, 'ZZ', 'happy');
    const problems = draftProblems(draft, model);
    expect(problems).toHaveLength(2);
    expect(problems[0]).toContain('A~>D');
    expect(problems[1]).toContain('ZZ');
  });
});

describe('latest-wins gate', () => {
  it('keeps at most one run current', () => {
    const gate = new LatestWins();
    const first = gate.begin();
    const second = gate.begin();
    expect(gate.isCurrent(first)).toBe(false);
    expect(gate.isCurrent(second)).toBe(true);
  });
});
