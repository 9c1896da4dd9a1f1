// Pure data preparation for the ranking and access overlays.

import type { AccessResponse, RankResponse } from './types.js';

export interface RankRow {
  entity: string;
  score: number;
  influenceSet: string[];
}

export function rankRows(resp: RankResponse): RankRow[] {
  return resp.ranking.entries.map((e) => ({
    entity: e.entity,
    score: e.score,
    influenceSet: e.influence_set,
  }));
}

/** Entities to highlight when a ranking row is selected. */
export function rankHighlight(rows: RankRow[], entity: string): string[] {
  const row = rows.find((r) => r.entity === entity);
  return row ? [row.entity, ...row.influenceSet] : [];
}

export interface AccessOverlay {
  blocked: string[];
  open: string[];
  /** target entity -> entry..target id path to draw */
  workaroundPaths: Record<string, string[]>;
}

export function accessOverlay(resp: AccessResponse): AccessOverlay {
  const blocked: string[] = [];
  const open: string[] = [];
  const workaroundPaths: Record<string, string[]> = {};
  for (const [entity, status] of Object.entries(resp.access.statuses)) {
    if (status.status === 'blocked') {
      blocked.push(entity);
    } else if (status.status === 'workaround' && status.path) {
      workaroundPaths[entity] = status.path;
    } else {
      open.push(entity);
    }
  }
  blocked.sort();
  open.sort();
  return { blocked, open, workaroundPaths };
}
