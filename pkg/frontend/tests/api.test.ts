import { describe, expect, it } from "vitest";

import { ApiError, ConsoleApi } from "../src/api.js";

function fakeFetch(routes: Record<string, { status?: number; body: unknown }>) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const route = Object.entries(routes).find(([prefix]) => url.includes(prefix));
    if (!route) {
      return new Response(JSON.stringify({ error: "no such endpoint" }), { status: 404 });
    }
    const { status = 200, body } = route[1];
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { impl, calls };
}

describe("ConsoleApi", () => {
  it("fetches and unwraps the pending list", async () => {
    const { impl, calls } = fakeFetch({
      "/api/v1/pending": { body: { pending: [{ pending_id: "pend-1" }] } },
    });
    const api = new ConsoleApi("http://broker", impl);
    const pendings = await api.getPending();
    expect(pendings).toEqual([{ pending_id: "pend-1" }]);
    expect(calls[0].url).toBe("http://broker/api/v1/pending");
  });

  it("posts decisions as JSON", async () => {
    const { impl, calls } = fakeFetch({
      "/decision": { body: { status: "resolved", outcome: "PERMIT", pending: null } },
    });
    const api = new ConsoleApi("http://broker", impl);
    const result = await api.postDecision("pend-1", "operator", "approve");
    expect(result.outcome).toBe("PERMIT");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      human_id: "operator",
      verdict: "approve",
    });
  });

  it("surfaces server errors verbatim", async () => {
    const { impl } = fakeFetch({
      "/decision": { status: 410, body: { error: "pending pend-1 expired" } },
    });
    const api = new ConsoleApi("http://broker", impl);
    await expect(api.postDecision("pend-1", "operator", "approve")).rejects.toThrowError(
      ApiError,
    );
    await expect(api.postDecision("pend-1", "operator", "approve")).rejects.toThrow(
      "pending pend-1 expired",
    );
  });

  it("encodes the audit since parameter", async () => {
    const { impl, calls } = fakeFetch({ "/api/v1/audit": { body: { records: [] } } });
    const api = new ConsoleApi("http://broker", impl);
    await api.getAudit(17);
    expect(calls[0].url).toContain("since=17");
  });
});
