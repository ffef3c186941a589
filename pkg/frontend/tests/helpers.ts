/** Test doubles for the /v1 service. */

import type { Label, QueueItem } from "../src/types.js";

export function jsonResponse(status: number, data: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    statusText: status === 200 ? "OK" : "Error",
    json: async () => data,
  } as unknown as Response;
}

export function deferred<T>(): {
  promise: Promise<T>;
  resolve: (value: T) => void;
  reject: (reason: unknown) => void;
} {
  let resolve!: (value: T) => void;
  let reject!: (reason: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

export function queueItem(r: number, s: number): QueueItem {
  return {
    pair: [r, s],
    r_attrs: [
      ["name", `left record ${r}`],
      ["city", "Springfield"],
    ],
    s_attrs: [
      ["name", `right record ${s}`],
      ["city", "Springfield"],
    ],
  };
}

export interface FakeService {
  fetch: (input: string, init?: RequestInit) => Promise<Response>;
  posts: Label[][];
}

/** In-memory labels endpoint over `items`; pairs listed in `conflicts`
 * answer 409 as the live service does for pairs it is not asking about. */
export function fakeService(items: QueueItem[], conflicts: [number, number][] = []): FakeService {
  const conflictKeys = new Set(conflicts.map(([r, s]) => `${r}:${s}`));
  const pending = new Set(
    items
      .filter(item => !conflictKeys.has(`${item.pair[0]}:${item.pair[1]}`))
      .map(item => `${item.pair[0]}:${item.pair[1]}`),
  );
  const posts: Label[][] = [];
  const doFetch = async (input: string, init?: RequestInit): Promise<Response> => {
    if (input.endsWith("/queue")) {
      return jsonResponse(200, items);
    }
    if (input.endsWith("/labels")) {
      const body = JSON.parse(String(init?.body)) as Label[];
      posts.push(body);
      const label = body[0]!;
      const key = `${label.r_id}:${label.s_id}`;
      if (!pending.has(key)) {
        return jsonResponse(409, { detail: `pair (${label.r_id}, ${label.s_id}) is not queued` });
      }
      pending.delete(key);
      return jsonResponse(200, { accepted: 1, remaining: pending.size });
    }
    throw new Error(`unexpected request: ${input}`);
  };
  return { fetch: doFetch, posts };
}
