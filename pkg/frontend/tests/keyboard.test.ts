import { describe, expect, it } from "vitest";

import { bindKeys } from "../src/keyboard.js";

function press(target: EventTarget, key: string, init: KeyboardEventInit = {}): void {
  target.dispatchEvent(new KeyboardEvent("keydown", { key, bubbles: true, ...init }));
}

describe("bindKeys", () => {
  it("dispatches to the handler for the pressed key", () => {
    const hits: string[] = [];
    const unbind = bindKeys(document, {
      d: () => hits.push("d"),
      n: () => hits.push("n"),
    });
    press(document, "d");
    press(document, "n");
    press(document, "x");
    expect(hits).toEqual(["d", "n"]);
    unbind();
  });

  it("ignores presses inside form fields", () => {
    const hits: string[] = [];
    const unbind = bindKeys(document, { d: () => hits.push("d") });
    for (const tag of ["input", "select", "textarea"]) {
      const field = document.createElement(tag);
      document.body.appendChild(field);
      press(field, "d");
      field.remove();
    }
    expect(hits).toEqual([]);
    unbind();
  });

  it("ignores chords with ctrl or meta", () => {
    const hits: string[] = [];
    const unbind = bindKeys(document, { d: () => hits.push("d") });
    press(document, "d", { ctrlKey: true });
    press(document, "d", { metaKey: true });
    expect(hits).toEqual([]);
    unbind();
  });

  it("stops dispatching after unbind", () => {
    const hits: string[] = [];
    const unbind = bindKeys(document, { d: () => hits.push("d") });
    press(document, "d");
    unbind();
    press(document, "d");
    expect(hits).toEqual(["d"]);
  });
});
