import type { OntologyPayload, SearchRequest, SearchResponse } from './types.js';

const BASE = '';

async function getJson<T>(path: string): Promise<T> {
  const resp = await fetch(`${BASE}${path}`);
  if (!resp.ok) {
    throw new Error(`GET ${path} failed: HTTP ${resp.status}`);
  }
  return (await resp.json()) as T;
}

export function fetchOntology(): Promise<OntologyPayload> {
  return getJson<OntologyPayload>('/api/ontology');
}

export async function postSearch(request: SearchRequest): Promise<SearchResponse> {
  const resp = await fetch(`${BASE}/api/search`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(request)
  });
  if (!resp.ok) {
    throw new Error(`search failed: HTTP ${resp.status}`);
  }
  return (await resp.json()) as SearchResponse;
}
