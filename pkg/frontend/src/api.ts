// Thin typed client for the yardtwin service. Every number the console
// shows comes from one of these responses — no client-side recomputation.

import type {
  BayDetail,
  BlockListing,
  JobStatusPayload,
  KpiComparison,
  KpiReport,
  Layout,
  SimulationRequest,
  Snapshot,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let code = "HTTP_ERROR";
    let message = `${response.status} ${response.statusText}`;
    try {
      const body = (await response.json()) as { error?: { code?: string; message?: string } };
      if (body.error) {
        code = body.error.code ?? code;
        message = body.error.message ?? message;
      }
    } catch {
      // non-JSON error body: keep the status line
    }
    throw new ApiError(response.status, code, message);
  }
  return (await response.json()) as T;
}

function query(params: Record<string, string | number | undefined>): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined) search.set(key, String(value));
  }
  const encoded = search.toString();
  return encoded ? `?${encoded}` : "";
}

export class TwinApi {
  constructor(readonly baseUrl: string = "") {}

  getLayout(): Promise<Layout> {
    return request(`${this.baseUrl}/layout`);
  }

  getSnapshot(at?: string): Promise<Snapshot> {
    return request(`${this.baseUrl}/yard/snapshot${query({ at })}`);
  }

  getKpi(from: string, to: string): Promise<KpiReport> {
    return request(`${this.baseUrl}/kpi${query({ from, to })}`);
  }

  getBlocks(at?: string): Promise<BlockListing> {
    return request(`${this.baseUrl}/blocks${query({ at })}`);
  }

  getBay(blockId: string, bay: number, at?: string): Promise<BayDetail> {
    return request(`${this.baseUrl}/blocks/${encodeURIComponent(blockId)}/bays/${bay}${query({ at })}`);
  }

  submitSimulation(payload: SimulationRequest): Promise<{ job_id: string }> {
    return request(`${this.baseUrl}/simulations`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getSimulation(jobId: string): Promise<JobStatusPayload> {
    return request(`${this.baseUrl}/simulations/${encodeURIComponent(jobId)}`);
  }

  /** Poll a job until DONE/FAILED; resolves with the final payload. */
  async waitForSimulation(
    jobId: string,
    intervalMs = 2000,
    maxAttempts = 150,
    sleep: (ms: number) => Promise<void> = delay,
  ): Promise<JobStatusPayload> {
    for (let attempt = 0; attempt < maxAttempts; attempt++) {
      const status = await this.getSimulation(jobId);
      if (status.status === "DONE" || status.status === "FAILED") return status;
      await sleep(intervalMs);
    }
    throw new ApiError(504, "POLL_TIMEOUT", `job ${jobId} still running after ${maxAttempts} polls`);
  }
}

export function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export function comparisonOf(status: JobStatusPayload): KpiComparison {
  if (status.status !== "DONE" || !status.result) {
    throw new ApiError(409, "JOB_NOT_DONE", `job ${status.job_id} is ${status.status}`);
  }
  return status.result;
}
