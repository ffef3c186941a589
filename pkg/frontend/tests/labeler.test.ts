import { describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { bindKeys } from "../src/keyboard.js";
import { DUPLICATE, LabelFlow, NON_DUPLICATE } from "../src/labeler.js";
import { labelScreen, queueItemView } from "../src/labelView.js";
import type { LabelReceipt } from "../src/types.js";
import { deferred, fakeService, jsonResponse, queueItem } from "./helpers.js";

function settle(): Promise<void> {
  return new Promise(resolve => setTimeout(resolve, 0));
}

describe("LabelFlow", () => {
  it("posts exactly one label per queue item", async () => {
    const service = fakeService([queueItem(1, 11), queueItem(2, 12), queueItem(3, 13)]);
    const flow = new LabelFlow(new Client("", service.fetch), "s1");
    await flow.load();
    expect(flow.total).toBe(3);

    flow.decide(DUPLICATE);
    flow.decide(NON_DUPLICATE);
    flow.decide(DUPLICATE);
    await settle();

    expect(service.posts).toHaveLength(3);
    for (const post of service.posts) {
      expect(post).toHaveLength(1);
    }
    expect(service.posts.map(post => post[0])).toEqual([
      { r_id: 1, s_id: 11, label: 1 },
      { r_id: 2, s_id: 12, label: 0 },
      { r_id: 3, s_id: 13, label: 1 },
    ]);
    expect(flow.submitted).toBe(3);
    expect(flow.exhausted()).toBe(true);
  });

  it("reports the round as resuming once the service queue drains", async () => {
    const service = fakeService([queueItem(1, 11), queueItem(2, 12)]);
    const flow = new LabelFlow(new Client("", service.fetch), "s1");
    await flow.load();

    flow.decide(DUPLICATE);
    await settle();
    expect(flow.roundResuming()).toBe(false);

    flow.decide(NON_DUPLICATE);
    await settle();
    expect(flow.lastReceipt).toEqual({ accepted: 1, remaining: 0 });
    expect(flow.roundResuming()).toBe(true);
  });

  it("skips a 409 pair without losing the other decisions", async () => {
    const items = [queueItem(1, 11), queueItem(2, 12), queueItem(3, 13)];
    const service = fakeService(items, [[2, 12]]);
    const flow = new LabelFlow(new Client("", service.fetch), "s1");
    await flow.load();

    flow.decide(DUPLICATE);
    flow.decide(DUPLICATE);
    flow.decide(NON_DUPLICATE);
    await settle();

    expect(service.posts).toHaveLength(3);
    expect(flow.submitted).toBe(2);
    expect(flow.skipped).toBe(1);
    expect(flow.conflicts).toHaveLength(1);
    expect(flow.conflicts[0]!.pair).toEqual([2, 12]);
    expect(flow.lastError).toBeNull();
    expect(flow.exhausted()).toBe(true);
    expect(flow.roundResuming()).toBe(true);
  });

  it("recalls the newest not-yet-posted decision on undo", async () => {
    const first = deferred<Response>();
    let calls = 0;
    const posts: string[] = [];
    const doFetch = async (url: string, init?: RequestInit): Promise<Response> => {
      if (url.endsWith("/queue")) {
        return jsonResponse(200, [queueItem(1, 11), queueItem(2, 12)]);
      }
      calls += 1;
      posts.push(String(init?.body));
      if (calls === 1) {
        return first.promise;
      }
      return jsonResponse(200, { accepted: 1, remaining: 0 });
    };
    const flow = new LabelFlow(new Client("", doFetch), "s1");
    await flow.load();

    flow.decide(DUPLICATE);
    flow.decide(DUPLICATE);
    // The first decision is on the wire; the second has not been
    // posted yet, so undo must bring pair (2, 12) back.
    expect(flow.undo()).toBe(true);
    expect(flow.current()?.pair).toEqual([2, 12]);

    // The decision on the wire cannot be recalled.
    expect(flow.undo()).toBe(false);

    first.resolve(jsonResponse(200, { accepted: 1, remaining: 1 }));
    await settle();
    expect(calls).toBe(1);
    expect(flow.submitted).toBe(1);
    expect(flow.decidedCount()).toBe(1);

    // Decide the restored pair the other way; only now is it posted.
    flow.decide(NON_DUPLICATE);
    await settle();
    expect(calls).toBe(2);
    expect(JSON.parse(posts[1]!)).toEqual([{ r_id: 2, s_id: 12, label: 0 }]);
  });

  it("keeps failed decisions staged and retries them in order", async () => {
    let healthy = false;
    const service = fakeService([queueItem(1, 11), queueItem(2, 12)]);
    const doFetch = async (url: string, init?: RequestInit): Promise<Response> => {
      if (!url.endsWith("/queue") && !healthy) {
        throw new TypeError("fetch failed");
      }
      return service.fetch(url, init);
    };
    const flow = new LabelFlow(new Client("", doFetch), "s1");
    await flow.load();

    flow.decide(DUPLICATE);
    await settle();
    expect(flow.lastError).toBe("fetch failed");
    expect(flow.submitted).toBe(0);

    // Further decisions stack up instead of hammering a dead service.
    flow.decide(NON_DUPLICATE);
    await settle();
    expect(service.posts).toHaveLength(0);

    healthy = true;
    flow.retry();
    await settle();
    expect(flow.lastError).toBeNull();
    expect(flow.submitted).toBe(2);
    expect(service.posts.map(post => post[0])).toEqual([
      { r_id: 1, s_id: 11, label: 1 },
      { r_id: 2, s_id: 12, label: 0 },
    ]);
  });

  it("drives decisions from the d/n/u keys, ignoring form fields", async () => {
    const service = fakeService([queueItem(1, 11), queueItem(2, 12)]);
    const flow = new LabelFlow(new Client("", service.fetch), "s1");
    await flow.load();
    const unbind = bindKeys(document, {
      d: () => flow.decide(DUPLICATE),
      n: () => flow.decide(NON_DUPLICATE),
      u: () => flow.undo(),
    });

    const press = (key: string, target: EventTarget = document) => {
      target.dispatchEvent(new KeyboardEvent("keydown", { key, bubbles: true }));
    };

    const input = document.createElement("input");
    document.body.appendChild(input);
    press("d", input);
    await settle();
    expect(service.posts).toHaveLength(0);

    press("d");
    await settle();
    press("n");
    await settle();
    expect(service.posts.map(post => post[0])).toEqual([
      { r_id: 1, s_id: 11, label: 1 },
      { r_id: 2, s_id: 12, label: 0 },
    ]);
    unbind();
    input.remove();
  });
});

describe("label screens", () => {
  it("shows the pair's attributes verbatim with progress", () => {
    const item = queueItem(4, 44);
    const view = queueItemView(item, 1, 6);
    expect(view.querySelector(".progress")!.textContent).toBe(
      "pair 4 · 44 — 1 of 6 decided",
    );
    const values = Array.from(view.querySelectorAll(".attributes td")).map(
      td => td.textContent,
    );
    expect(values).toEqual(["left record 4", "Springfield", "right record 44", "Springfield"]);
  });

  it("announces the resuming round after the queue drains", async () => {
    const service = fakeService([queueItem(1, 11)]);
    const flow = new LabelFlow(new Client("", service.fetch), "s1");
    await flow.load();
    flow.decide(DUPLICATE);
    await settle();

    const screen = labelScreen(flow, () => {});
    expect(screen.textContent).toContain("round resuming");
  });

  it("surfaces a conflict as a notice, not an error", async () => {
    const service = fakeService([queueItem(1, 11)], [[1, 11]]);
    const flow = new LabelFlow(new Client("", service.fetch), "s1");
    await flow.load();
    flow.decide(DUPLICATE);
    await settle();

    const screen = labelScreen(flow, () => {});
    const notice = screen.querySelector(".banner.notice")!;
    expect(notice.textContent).toContain("skipped");
    expect(screen.querySelector(".banner.error")).toBeNull();
  });

  it("offers a retry that resubmits after a failure", async () => {
    let healthy = false;
    let receipt: LabelReceipt | null = null;
    const service = fakeService([queueItem(1, 11)]);
    const doFetch = async (url: string, init?: RequestInit): Promise<Response> => {
      if (!url.endsWith("/queue") && !healthy) {
        throw new TypeError("fetch failed");
      }
      const response = await service.fetch(url, init);
      if (url.endsWith("/labels")) {
        receipt = { accepted: 1, remaining: 0 };
      }
      return response;
    };
    const flow = new LabelFlow(new Client("", doFetch), "s1");
    await flow.load();
    flow.decide(DUPLICATE);
    await settle();

    const screen = labelScreen(flow, () => flow.retry());
    const banner = screen.querySelector(".banner.error")!;
    expect(banner.textContent).toContain("fetch failed");

    healthy = true;
    banner.querySelector("button")!.click();
    await settle();
    expect(flow.submitted).toBe(1);
    expect(receipt).toEqual({ accepted: 1, remaining: 0 });
  });
});
