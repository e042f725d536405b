/**
 * Thin typed client for the autotour service.  All matching math lives
 * server-side; the UI only displays what these calls return.
 */

import type {
  CameraMeta,
  DryrunResponse,
  HealthFlags,
  JobStatus,
  PhotoFeatureSpec,
  SceneResultDoc,
} from './types';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly errorCode: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiRequestError> {
  try {
    const body = await resp.json();
    return new ApiRequestError(resp.status, body.error_code ?? 'unknown', body.message ?? resp.statusText);
  } catch {
    return new ApiRequestError(resp.status, 'unknown', resp.statusText);
  }
}

export class AutotourClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, '')}${path}`;
  }

  async submitJob(photo: Blob, meta: CameraMeta): Promise<string> {
    const form = new FormData();
    form.append('photo', photo, 'photo.jpg');
    form.append('meta', JSON.stringify(meta));
    const resp = await this.fetchImpl(this.url('/v1/jobs'), { method: 'POST', body: form });
    if (!resp.ok) throw await parseError(resp);
    const body = await resp.json();
    return body.job_id as string;
  }

  async getStatus(jobId: string): Promise<JobStatus> {
    const resp = await this.fetchImpl(this.url(`/v1/jobs/${jobId}/status`));
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as JobStatus;
  }

  async getResult(jobId: string): Promise<SceneResultDoc> {
    const resp = await this.fetchImpl(this.url(`/v1/jobs/${jobId}/result`));
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as SceneResultDoc;
  }

  async health(): Promise<HealthFlags> {
    const resp = await this.fetchImpl(this.url('/v1/health'));
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as HealthFlags;
  }

  async dryrun(
    camera: CameraMeta,
    features: PhotoFeatureSpec[],
    signal?: AbortSignal,
  ): Promise<DryrunResponse> {
    const resp = await this.fetchImpl(this.url('/v1/dryrun'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ camera, features }),
      signal,
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as DryrunResponse;
  }

  /** Poll status until the job reaches a terminal state. */
  async pollUntilDone(
    jobId: string,
    onProgress?: (status: JobStatus) => void,
    intervalMs = 500,
    maxAttempts = 600,
  ): Promise<JobStatus> {
    for (let attempt = 0; attempt < maxAttempts; attempt++) {
      const status = await this.getStatus(jobId);
      onProgress?.(status);
      if (status.state === 'done' || status.state === 'failed') return status;
      await new Promise((r) => setTimeout(r, intervalMs));
    }
    throw new Error(`job ${jobId} did not finish after ${maxAttempts} polls`);
  }
}
