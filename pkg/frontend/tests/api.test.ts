import { describe, expect, it } from "vitest";

import { ApiError, Client } from "../src/api.js";
import { jsonResponse } from "./helpers.js";

describe("Client", () => {
  it("returns parsed session summaries", async () => {
    const summaries = [{ id: "abc", status: "idle", round: 1 }];
    const calls: string[] = [];
    const client = new Client("", async url => {
      calls.push(url);
      return jsonResponse(200, summaries);
    });
    expect(await client.sessions()).toEqual(summaries);
    expect(calls).toEqual(["/v1/sessions"]);
  });

  it("prefixes the configured base URL", async () => {
    const calls: string[] = [];
    const client = new Client("http://api.example", async url => {
      calls.push(url);
      return jsonResponse(200, []);
    });
    await client.queue("s1");
    expect(calls).toEqual(["http://api.example/v1/sessions/s1/queue"]);
  });

  it("posts one label per submit call", async () => {
    const bodies: string[] = [];
    const client = new Client("", async (_url, init) => {
      bodies.push(String(init?.body));
      return jsonResponse(200, { accepted: 1, remaining: 4 });
    });
    const receipt = await client.submit("s1", { r_id: 7, s_id: 9, label: 1 });
    expect(receipt).toEqual({ accepted: 1, remaining: 4 });
    expect(bodies).toHaveLength(1);
    expect(JSON.parse(bodies[0]!)).toEqual([{ r_id: 7, s_id: 9, label: 1 }]);
  });

  it("raises ApiError with the service's status and detail", async () => {
    const client = new Client("", async () =>
      jsonResponse(409, { detail: "pair (1, 2) is not queued" }),
    );
    const error = await client
      .submit("s1", { r_id: 1, s_id: 2, label: 0 })
      .then(() => null)
      .catch((err: unknown) => err);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(409);
    expect((error as ApiError).message).toBe("pair (1, 2) is not queued");
  });

  it("falls back to the status line when the error body is not JSON", async () => {
    const client = new Client("", async () => {
      return {
        ok: false,
        status: 502,
        statusText: "Bad Gateway",
        json: async () => {
          throw new SyntaxError("not json");
        },
      } as unknown as Response;
    });
    const error = await client.sessions().catch((err: unknown) => err);
    expect((error as ApiError).status).toBe(502);
    expect((error as ApiError).message).toBe("502 Bad Gateway");
  });
});
