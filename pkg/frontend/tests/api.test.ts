import { describe, expect, it, vi } from "vitest";

import { StudyApi } from "../src/api.js";
import { StudyApiError } from "../src/types.js";

function fetchReturning(status: number, body: unknown) {
  return vi.fn(async () => ({
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  })) as unknown as typeof fetch;
}

describe("StudyApi", () => {
  it("posts the rater id when creating a session", async () => {
    const fetchImpl = fetchReturning(200, { session_id: "s1", rater_id: "w1", total: 4 });
    const api = new StudyApi("http://svc", fetchImpl);
    const session = await api.createSession("w1", 4, 7);
    expect(session.session_id).toBe("s1");
    const [url, init] = (fetchImpl as any).mock.calls[0];
    expect(url).toBe("http://svc/sessions");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body)).toEqual({ rater_id: "w1", queue_size: 4, seed: 7 });
  });

  it("fetches the next view", async () => {
    const fetchImpl = fetchReturning(200, { done: true, completed: 2, total: 2 });
    const api = new StudyApi("", fetchImpl);
    const view = await api.next("s1");
    expect(view).toEqual({ done: true, completed: 2, total: 2 });
    expect((fetchImpl as any).mock.calls[0][0]).toBe("/sessions/s1/next");
  });

  it("sends pre and post bodies to the item endpoints", async () => {
    const fetchImpl = fetchReturning(200, {
      headline_id: "h1",
      headline_text: "t",
      phase: "revealed",
      position: 1,
      total: 2,
      implication_text: "The writer is implying that x",
    });
    const api = new StudyApi("", fetchImpl);
    await api.submitPre("s1", "h1", 4);
    expect((fetchImpl as any).mock.calls[0][0]).toBe("/sessions/s1/items/h1/pre");
    expect(JSON.parse((fetchImpl as any).mock.calls[0][1].body)).toEqual({ trust: 4 });

    await api.submitPost("s1", "h1", { trust: 2, quality: 5, acceptability: "majority" });
    expect((fetchImpl as any).mock.calls[1][0]).toBe("/sessions/s1/items/h1/post");
    expect(JSON.parse((fetchImpl as any).mock.calls[1][1].body)).toEqual({
      trust: 2,
      quality: 5,
      acceptability: "majority",
    });
  });

  it("propagates machine-readable error codes", async () => {
    const fetchImpl = fetchReturning(409, { code: "PhaseError", detail: "post before pre" });
    const api = new StudyApi("", fetchImpl);
    await expect(api.submitPost("s1", "h1", { trust: 1, quality: 1, acceptability: "fringe" }))
      .rejects.toMatchObject({ code: "PhaseError", status: 409 });
  });

  it("wraps unknown failures", async () => {
    const fetchImpl = fetchReturning(500, "oops");
    const api = new StudyApi("", fetchImpl);
    const error = await api.next("s1").catch((e) => e);
    expect(error).toBeInstanceOf(StudyApiError);
    expect(error.code).toBe("Unknown");
  });

  it("escapes ids in paths", async () => {
    const fetchImpl = fetchReturning(200, {});
    const api = new StudyApi("", fetchImpl);
    await api.next("s 1/x");
    expect((fetchImpl as any).mock.calls[0][0]).toBe("/sessions/s%201%2Fx/next");
  });
});
