import type {
  Demographics,
  FavouriteKind,
  FeatureHit,
  ItemHit,
  SessionStatus,
  SheetResponse,
  Verdict,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`service responded ${status}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, err instanceof Error ? err.message : String(err));
  }
  const body = response.status === 204 ? null : await response.json().catch(() => null);
  if (!response.ok) {
    throw new ApiError(response.status, body && (body as { detail?: unknown }).detail);
  }
  return body as T;
}

function jsonInit(method: string, payload: unknown): RequestInit {
  return {
    method,
    headers: { 'content-type': 'application/json' },
    body: JSON.stringify(payload),
  };
}

/** The service surface the UI consumes; implemented by ApiClient and test stubs. */
export interface CollectApi {
  health(): Promise<{ status: string }>;
  searchFeatures(type: string, q: string, limit?: number): Promise<FeatureHit[]>;
  searchItems(q: string, limit?: number): Promise<ItemHit[]>;
  createSession(demographics: Demographics): Promise<SessionStatus>;
  getSession(sessionId: string): Promise<SessionStatus>;
  putFavourites(
    sessionId: string,
    favourites: { kind: FavouriteKind; target_id: string }[],
  ): Promise<SessionStatus>;
  beginTest(sessionId: string): Promise<SheetResponse>;
  submitTest(
    sessionId: string,
    selections: { kind: FavouriteKind; target_id: string }[],
  ): Promise<Verdict>;
}

/** Thin typed client for the collection service. */
export class ApiClient implements CollectApi {
  constructor(readonly baseUrl: string = '') {}

  private url(path: string, params?: Record<string, string>): string {
    const query = params ? `?${new URLSearchParams(params)}` : '';
    return `${this.baseUrl}${path}${query}`;
  }

  health(): Promise<{ status: string }> {
    return request(this.url('/health'));
  }

  searchFeatures(type: string, q: string, limit = 8): Promise<FeatureHit[]> {
    return request(this.url('/api/features', { type, q, limit: String(limit) }));
  }

  searchItems(q: string, limit = 8): Promise<ItemHit[]> {
    return request(this.url('/api/items', { q, limit: String(limit) }));
  }

  createSession(demographics: Demographics): Promise<SessionStatus> {
    return request(this.url('/api/sessions'), jsonInit('POST', demographics));
  }

  getSession(sessionId: string): Promise<SessionStatus> {
    return request(this.url(`/api/sessions/${sessionId}`));
  }

  putFavourites(
    sessionId: string,
    favourites: { kind: FavouriteKind; target_id: string }[],
  ): Promise<SessionStatus> {
    return request(
      this.url(`/api/sessions/${sessionId}/favourites`),
      jsonInit('PUT', { favourites }),
    );
  }

  beginTest(sessionId: string): Promise<SheetResponse> {
    return request(this.url(`/api/sessions/${sessionId}/begin-test`), { method: 'POST' });
  }

  submitTest(
    sessionId: string,
    selections: { kind: FavouriteKind; target_id: string }[],
  ): Promise<Verdict> {
    return request(
      this.url(`/api/sessions/${sessionId}/submit-test`),
      jsonInit('POST', { selections }),
    );
  }
}
