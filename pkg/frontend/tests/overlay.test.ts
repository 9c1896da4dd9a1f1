import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { accessOverlay, rankHighlight, rankRows } from '../src/overlay.js';
import type { AccessResponse, RankResponse } from '../src/types.js';

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(__dirname, 'fixtures', name), 'utf-8')) as T;
}

describe('ranking overlay', () => {
  const rows = rankRows(fixture<RankResponse>('rank.json'));

  it('lists the informal channel above the hierarchy head', () => {
    const order = rows.map((r) => r.entity);
    expect(order.indexOf('D')).toBeLessThan(order.indexOf('A'));
    expect(rows.find((r) => r.entity === 'D')).toEqual({
      entity: 'D',
      score: 2,
      influenceSet: ['A', 'B'],
    });
  });

  it('highlights the selected entity plus its influence set', () => {
    expect(rankHighlight(rows, 'D')).toEqual(['D', 'A', 'B']);
    expect(rankHighlight(rows, 'nope')).toEqual([]);
  });
});

describe('access overlay', () => {
  it('shades the blocked employee when there is no back channel', () => {
    const overlay = accessOverlay(fixture<AccessResponse>('access-blocked.json'));
    expect(overlay.blocked).toEqual(['E']);
    expect(overlay.workaroundPaths).toEqual({});
    expect(overlay.open).toEqual(['M', 'R']);
  });

  it('draws the workaround path once an informal edge exists', () => {
    const overlay = accessOverlay(fixture<AccessResponse>('access-workaround.json'));
    expect(overlay.blocked).toEqual([]);
    expect(overlay.workaroundPaths).toEqual({ E: ['R', 'M', 'E'] });
  });
});
