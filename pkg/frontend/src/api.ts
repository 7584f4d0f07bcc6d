/** Enroll/verify/health calls against the signing service. */

export interface VerifyResult {
  distance: number;
  threshold: number;
  accepted: boolean;
}

export interface EnrollResult {
  user: string;
  reference_id: string;
}

export interface HealthResult {
  status: string;
  model_version: string;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ServiceApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) =>
      fetch(...(args as Parameters<typeof fetch>)),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    const payload = (await res.json()) as Record<string, unknown>;
    if (!res.ok) {
      const detail =
        typeof payload.error === 'string' ? payload.error : `HTTP ${res.status}`;
      throw new Error(detail);
    }
    return payload as T;
  }

  enroll(user: string, pngBase64: string): Promise<EnrollResult> {
    return this.post<EnrollResult>('/enroll', { user, png_base64: pngBase64 });
  }

  verify(user: string, pngBase64: string): Promise<VerifyResult> {
    return this.post<VerifyResult>('/verify', { user, png_base64: pngBase64 });
  }

  async health(): Promise<HealthResult> {
    const res = await this.fetchImpl(this.baseUrl + '/health');
    if (!res.ok) throw new Error(`HTTP ${res.status}`);
    return (await res.json()) as HealthResult;
  }
}
