// Pure playback model: turns an API propagation trace into frame-by-frame
// badge states. The UI never recomputes propagation; every mood shown here
// comes from the trace, tagged with the revision of the response it arrived
// in.

import type { MoodChangeJson, MoodValue, TraceJson } from './types.js';

export interface ConflictBadge {
  entity: string;
  /** The competing influencers, for the tooltip. */
  sources: string[];
}

export interface Frame {
  /** 0 is the initial state (overrides already applied). */
  round: number;
  moods: Record<string, MoodValue>;
  /** Entities whose mood changed in this round; pulse these. */
  pulsing: string[];
  conflicts: ConflictBadge[];
}

export interface Playback {
  revision: number;
  frames: Frame[];
  /** Rounds the engine recorded (frames minus the initial one). */
  roundCount: number;
  changeRounds: number;
  badges: MoodChangeJson[];
  termination: TraceJson['termination'];
}

export function buildPlayback(trace: TraceJson, revision: number): Playback {
  const moods: Record<string, MoodValue> = { ...trace.initial };
  for (const o of trace.overrides) {
    moods[o.entity] = o.mood;
  }
  const frames: Frame[] = [
    {
      round: 0,
      moods: { ...moods },
      pulsing: trace.overrides.map((o) => o.entity),
      conflicts: [],
    },
  ];
  for (const round of trace.rounds) {
    for (const change of round.changes) {
      moods[change.entity] = change.after;
    }
    frames.push({
      round: round.round,
      moods: { ...moods },
      pulsing: round.changes.map((c) => c.entity),
      conflicts: round.resolutions
        .filter((r) => r.conflict)
        .map((r) => ({ entity: r.target, sources: r.sources })),
    });
  }
  return {
    revision,
    frames,
    roundCount: trace.rounds.length,
    changeRounds: trace.rounds.filter((r) => r.changes.length > 0).length,
    badges: diffBadges(trace),
    termination: trace.termination,
  };
}

/** Final-versus-initial mood changes, in id order (the side panel list). */
export function diffBadges(trace: TraceJson): MoodChangeJson[] {
  return Object.keys(trace.initial)
    .sort()
    .filter((entity) => trace.initial[entity] !== trace.final[entity])
    .map((entity) => ({
      entity,
      before: trace.initial[entity],
      after: trace.final[entity],
    }));
}

/** The badge every entity ends on; must mirror the trace exactly. */
export function finalBadges(playback: Playback): Record<string, MoodValue> {
  return { ...playback.frames[playback.frames.length - 1].moods };
}

/** Conflict badges across the whole run, keyed by entity (tooltip text). */
export function conflictTooltips(playback: Playback): Record<string, string> {
  const out: Record<string, string> = {};
  for (const frame of playback.frames) {
    for (const c of frame.conflicts) {
      out[c.entity] = `Conflicting influence: ${c.sources.join(', ')}`;
    }
  }
  return out;
}

export function terminationLabel(playback: Playback): string {
  const t = playback.termination;
  if (t.kind === 'oscillation') return `oscillation (period ${t.period})`;
  if (t.kind === 'round_cap') return 'stopped at the round cap';
  return 'fixpoint';
}
