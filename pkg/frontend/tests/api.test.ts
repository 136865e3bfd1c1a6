import { afterEach, describe, expect, it, vi } from "vitest";

import { SurveyApi, assertBlindedPair } from "../src/api.js";

function mockFetch(handler: (url: string, init?: RequestInit) => { status: number; body: unknown }) {
  const fn = vi.fn(async (url: string, init?: RequestInit) => {
    const { status, body } = handler(url, init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  });
  vi.stubGlobal("fetch", fn);
  return fn;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("assertBlindedPair", () => {
  it("accepts the documented schema", () => {
    const pair = assertBlindedPair({
      index: 0,
      total: 50,
      left: "/api/image/img001",
      right: "/api/image/img002",
    });
    expect(pair.left).toBe("/api/image/img001");
  });

  it("rejects payloads with extra fields", () => {
    expect(() =>
      assertBlindedPair({ index: 0, total: 50, left: "a", right: "b", kind: "real_real" }),
    ).toThrow(/blinding violation/);
    expect(() =>
      assertBlindedPair({ index: 0, total: 50, left: "a", right: "b", synth_side: "left" }),
    ).toThrow(/blinding violation/);
  });

  it("rejects payloads mentioning the synthetic side anywhere", () => {
    expect(() =>
      assertBlindedPair({ index: 0, total: 50, left: "/api/image/synth01", right: "b" }),
    ).toThrow(/blinding violation/);
  });
});

describe("SurveyApi.submit", () => {
  it("maps status codes to outcomes", async () => {
    const api = new SurveyApi("");
    const body = {
      participant_id: "p",
      group: "engineer",
      pair_index: 0,
      selection: "left" as const,
      tag: "anatomy",
      explanation: "",
    };

    mockFetch(() => ({
      status: 200,
      body: { status: "stored", participant_id: "p", answered: [0], next_unanswered: 1, total: 50, complete: false },
    }));
    expect((await api.submit(body)).kind).toBe("stored");

    mockFetch(() => ({ status: 409, body: { detail: "duplicate" } }));
    expect((await api.submit(body)).kind).toBe("conflict");

    mockFetch(() => ({ status: 400, body: { detail: "bad group" } }));
    const rejected = await api.submit(body);
    expect(rejected.kind).toBe("rejected");
  });
});
