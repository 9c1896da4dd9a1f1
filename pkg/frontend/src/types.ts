// Wire types for the polorg JSON API (see docs/schema.md in the repo root).

export type MoodValue = 'happy' | 'sad' | 'neutral';

export interface EntityJson {
  label: string | null;
  title: string | null;
  mood: MoodValue;
}

export interface FormalEdgeJson {
  superior: string;
  subordinate: string;
  power: number;
  blocked: boolean;
}

export interface InformalEdgeJson {
  source: string;
  target: string;
  strength: number;
  active: boolean;
  note: string | null;
}

export interface ModelJson {
  name: string;
  entities: Record<string, EntityJson>;
  formal: FormalEdgeJson[];
  informal: InformalEdgeJson[];
}

export interface DeliveryJson {
  source: string;
  target: string;
  kind: 'formal' | 'informal';
  mood: MoodValue;
  strength: number;
}

export interface ResolutionJson {
  target: string;
  resolved: MoodValue;
  applied: MoodValue;
  conflict: boolean;
  sources: string[];
}

export interface MoodChangeJson {
  entity: string;
  before: MoodValue;
  after: MoodValue;
}

export interface RoundJson {
  round: number;
  deliveries: DeliveryJson[];
  resolutions: ResolutionJson[];
  changes: MoodChangeJson[];
}

export interface TerminationJson {
  kind: 'fixpoint' | 'oscillation' | 'round_cap';
  period: number | null;
}

export interface TraceJson {
  initial: Record<string, MoodValue>;
  overrides: { entity: string; mood: MoodValue }[];
  rounds: RoundJson[];
  final: Record<string, MoodValue>;
  termination: TerminationJson;
}

export interface RankEntryJson {
  entity: string;
  score: number;
  influence_set: string[];
}

export interface AccessStatusJson {
  status: 'open' | 'workaround' | 'blocked';
  path?: string[];
}

export interface DiagnosticJson {
  severity: 'error' | 'warning';
  code: string;
  message: string;
  span: { line: number; col: number; length: number } | null;
}

export interface ScenarioBody {
  activations?: { source: string; target: string; active: boolean }[];
  overrides?: Record<string, MoodValue>;
  params?: { cascade_threshold?: number; mode?: 'adopt' | 'graded'; max_rounds?: number | null };
}

// Response envelopes: every analytical payload is tagged with the model
// revision it was computed against.
export interface ModelResponse {
  revision: number;
  model: ModelJson;
}

export interface TraceResponse {
  revision: number;
  trace: TraceJson;
}

export interface RankResponse {
  revision: number;
  ranking: { entries: RankEntryJson[] };
}

export interface AccessResponse {
  revision: number;
  access: { statuses: Record<string, AccessStatusJson> };
}

export const MOOD_GLYPHS: Record<MoodValue, string> = {
  happy: '\u{1F60A}',
  sad: '☹',
  neutral: '\u{1F610}',
};
