// Thin typed client for the local polorg API. Errors carry the server's
// diagnostics when it sent any.

import type {
  AccessResponse,
  DiagnosticJson,
  ModelResponse,
  RankResponse,
  ScenarioBody,
  TraceResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly diagnostics: DiagnosticJson[] = [],
  ) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(path, init);
  } catch (e) {
    throw new ApiError(`server unreachable: ${String(e)}`, 0);
  }
  if (!resp.ok) {
    let diagnostics: DiagnosticJson[] = [];
    let detail = `${resp.status}`;
    try {
      const body = await resp.json();
      diagnostics = body.diagnostics ?? [];
      detail = body.error ?? diagnostics.map((d: DiagnosticJson) => `${d.code} ${d.message}`).join('; ') ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(detail, resp.status, diagnostics);
  }
  return (await resp.json()) as T;
}

export function getModel(): Promise<ModelResponse> {
  return request('/api/model');
}

export async function getRenderedSvg(): Promise<{ revision: number; svg: string }> {
  const resp = await fetch('/api/render.svg');
  if (!resp.ok) throw new ApiError(`render failed: ${resp.status}`, resp.status);
  return {
    revision: Number(resp.headers.get('X-Model-Revision') ?? '0'),
    svg: await resp.text(),
  };
}

export function postPropagate(body: ScenarioBody, signal?: AbortSignal): Promise<TraceResponse> {
  return request('/api/propagate', {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(body),
    signal,
  });
}

export function getRank(): Promise<RankResponse> {
  return request('/api/rank');
}

export function getAccess(entries: string[]): Promise<AccessResponse> {
  const param = encodeURIComponent(entries.join(','));
  return request(`/api/access?entry=${param}`);
}
