import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function clientWith(response: Response) {
  const fetchFn = vi.fn(async () => response);
  return { client: new ApiClient("http://svc", fetchFn as typeof fetch), fetchFn };
}

describe("ApiClient", () => {
  it("posts a new session with a JSON body", async () => {
    const { client, fetchFn } = clientWith(
      jsonResponse(201, {
        session_id: "abc",
        first_move: { kind: "ask", text: "Do you work ?", confidence: 0.3 },
      }),
    );
    const result = await client.newSession({ request: "Can I ?", knowledge: "k" });
    expect(result.session_id).toBe("abc");
    expect(result.first_move.kind).toBe("ask");
    const [url, init] = fetchFn.mock.calls[0]!;
    expect(url).toBe("http://svc/sessions");
    expect(init?.method).toBe("POST");
    expect(JSON.parse(init?.body as string)).toEqual({
      request: "Can I ?",
      knowledge: "k",
    });
  });

  it("surfaces the server's detail message on errors", async () => {
    const { client } = clientWith(jsonResponse(409, { detail: "session is answered" }));
    await expect(client.reply("abc", "Yes")).rejects.toThrowError(ApiError);
    await expect(
      clientWith(jsonResponse(409, { detail: "session is answered" })).client.reply(
        "abc",
        "Yes",
      ),
    ).rejects.toMatchObject({ status: 409, detail: "session is answered" });
  });

  it("handles non-JSON error bodies", async () => {
    const { client } = clientWith(
      new Response("boom", { status: 500, statusText: "Internal Server Error" }),
    );
    await expect(client.health()).rejects.toMatchObject({ status: 500 });
  });

  it("fetches the raw transcript bytes unmodified", async () => {
    const raw = '{"id": "abc",  "moves": []}'; // odd spacing must survive
    const { client } = clientWith(new Response(raw, { status: 200 }));
    expect(await client.transcriptRaw("abc")).toBe(raw);
  });

  it("addresses the reply endpoint by session id", async () => {
    const { client, fetchFn } = clientWith(
      jsonResponse(200, { next_move: { kind: "answer", text: "Yes", confidence: 1 } }),
    );
    await client.reply("xyz", "No");
    expect(fetchFn.mock.calls[0]![0]).toBe("http://svc/sessions/xyz/reply");
  });
});
