import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";

interface Call {
  url: string;
  init?: RequestInit;
}

function mockFetch(status: number, body: unknown) {
  const calls: Call[] = [];
  const fn = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { calls, fn };
}

describe("ApiClient", () => {
  it("builds device query urls with encoding", async () => {
    const { calls, fn } = mockFetch(200, { records: [], truncated: false });
    const api = new ApiClient("http://x", fn);
    await api.fridgestats("dev 0", 25);
    expect(calls[0].url).toBe("http://x/api/fridgestats?device=dev%200&limit=25");
    expect(calls[0].init?.method).toBe("GET");
  });

  it("login stores the token and later requests carry it", async () => {
    const { calls, fn } = mockFetch(200, { token: "abc123", expiresAt: 1 });
    const api = new ApiClient("", fn);
    await api.login("op", "password1");
    expect(api.token).toBe("abc123");
    await api.updateSettings("dev-0", { temperatureTarget: 4, humidityTarget: 85 });
    const headers = calls[1].init?.headers as Record<string, string>;
    expect(headers["Authorization"]).toBe("Bearer abc123");
    expect(JSON.parse(calls[1].init?.body as string)).toEqual({
      device: "dev-0",
      temperatureTarget: 4,
      humidityTarget: 85,
    });
  });

  it("maps error bodies to ApiError with the backend detail", async () => {
    const { fn } = mockFetch(422, { detail: "temperatureTarget outside [-10.0, 20.0]" });
    const api = new ApiClient("", fn);
    await expect(
      api.updateSettings("dev-0", { temperatureTarget: 50, humidityTarget: 85 }),
    ).rejects.toThrowError(ApiError);
    try {
      await api.updateSettings("dev-0", { temperatureTarget: 50, humidityTarget: 85 });
    } catch (err) {
      expect((err as ApiError).status).toBe(422);
      expect((err as ApiError).message).toContain("temperatureTarget");
    }
  });

  it("logout clears the token even when the request fails", async () => {
    const { fn } = mockFetch(401, { detail: "invalid or expired token" });
    const api = new ApiClient("", fn);
    api.token = "stale";
    await expect(api.logout()).rejects.toThrow();
    expect(api.token).toBeNull();
  });
});
