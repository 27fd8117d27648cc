import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, TwinApi, comparisonOf } from "../src/api.js";
import type { JobStatusPayload } from "../src/types.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("TwinApi", () => {
  it("builds query strings and parses JSON", async () => {
    const fetchMock = vi.fn(async (url: RequestInfo | URL) => {
      expect(String(url)).toBe("/kpi?from=A&to=B");
      return jsonResponse({ total_moves: 5 });
    });
    vi.stubGlobal("fetch", fetchMock);
    const api = new TwinApi("");
    const kpi = await api.getKpi("A", "B");
    expect(kpi.total_moves).toBe(5);
  });

  it("raises ApiError with the server's code on failures", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () =>
        jsonResponse({ error: { status: 404, code: "NO_DATA_AT_TIME", message: "beyond" } }, 404),
      ),
    );
    const api = new TwinApi("");
    await expect(api.getSnapshot("2030-01-01T00:00:00Z")).rejects.toMatchObject({
      status: 404,
      code: "NO_DATA_AT_TIME",
    });
  });

  it("polls a job until DONE without real sleeping", async () => {
    const states: JobStatusPayload["status"][] = ["PENDING", "RUNNING", "DONE"];
    let call = 0;
    vi.stubGlobal(
      "fetch",
      vi.fn(async () =>
        jsonResponse({
          job_id: "j1",
          status: states[Math.min(call++, 2)],
          request: {},
        }),
      ),
    );
    const api = new TwinApi("");
    const sleeps: number[] = [];
    const status = await api.waitForSimulation("j1", 2000, 10, async (ms) => {
      sleeps.push(ms);
    });
    expect(status.status).toBe("DONE");
    expect(sleeps).toEqual([2000, 2000]);
  });

  it("gives up after maxAttempts", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => jsonResponse({ job_id: "j1", status: "RUNNING", request: {} })),
    );
    const api = new TwinApi("");
    await expect(
      api.waitForSimulation("j1", 1, 3, async () => {}),
    ).rejects.toMatchObject({ code: "POLL_TIMEOUT" });
  });

  it("encodes path segments", async () => {
    const fetchMock = vi.fn(async (url: RequestInfo | URL) => {
      expect(String(url)).toBe("/blocks/A%2FB/bays/3");
      return jsonResponse({ bay: 3, rows: [] });
    });
    vi.stubGlobal("fetch", fetchMock);
    await new TwinApi("").getBay("A/B", 3);
  });
});

describe("comparisonOf", () => {
  it("rejects jobs that are not DONE", () => {
    expect(() =>
      comparisonOf({ job_id: "x", status: "RUNNING", request: {} as never }),
    ).toThrow(ApiError);
  });
});
