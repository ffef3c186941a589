/** Label screen: the current pair side by side, progress and notices.
 *
 * Attribute values are rendered verbatim — long values wrap rather
 * than being cut off.
 */

import type { LabelFlow } from "./labeler.js";
import type { AttributeRow, QueueItem } from "./types.js";

function attributeTable(title: string, attrs: AttributeRow[]): HTMLElement {
  const box = document.createElement("div");
  box.className = "record";
  const heading = document.createElement("h3");
  heading.textContent = title;
  box.appendChild(heading);
  const table = document.createElement("table");
  table.className = "attributes";
  const tbody = document.createElement("tbody");
  for (const [name, value] of attrs) {
    const tr = document.createElement("tr");
    const nameCell = document.createElement("th");
    nameCell.textContent = name;
    tr.appendChild(nameCell);
    const valueCell = document.createElement("td");
    valueCell.textContent = value;
    tr.appendChild(valueCell);
    tbody.appendChild(tr);
  }
  table.appendChild(tbody);
  box.appendChild(table);
  return box;
}

/** The pair under review with its ids and both attribute tables. */
export function queueItemView(item: QueueItem, done: number, total: number): HTMLElement {
  const view = document.createElement("section");
  view.className = "queue-item";

  const progress = document.createElement("p");
  progress.className = "progress";
  progress.textContent = `pair ${item.pair[0]} · ${item.pair[1]} — ${done} of ${total} decided`;
  view.appendChild(progress);

  const pair = document.createElement("div");
  pair.className = "pair";
  pair.appendChild(attributeTable("left record", item.r_attrs));
  pair.appendChild(attributeTable("right record", item.s_attrs));
  view.appendChild(pair);

  const hint = document.createElement("p");
  hint.className = "hint";
  hint.textContent = "d duplicate · n non-duplicate · u undo";
  view.appendChild(hint);
  return view;
}

/** Render the whole label screen for the flow's current state. */
export function labelScreen(flow: LabelFlow, onRetry: () => void): HTMLElement {
  const screen = document.createElement("section");
  screen.className = "label-screen";

  if (flow.lastError !== null) {
    const banner = document.createElement("div");
    banner.className = "banner error";
    const text = document.createElement("span");
    text.textContent = `submit failed: ${flow.lastError}`;
    banner.appendChild(text);
    const button = document.createElement("button");
    button.textContent = "Retry";
    button.addEventListener("click", onRetry);
    banner.appendChild(button);
    screen.appendChild(banner);
  }

  for (const conflict of flow.conflicts) {
    const note = document.createElement("p");
    note.className = "banner notice";
    note.textContent =
      `pair ${conflict.pair[0]} · ${conflict.pair[1]} was already resolved ` +
      `(${conflict.detail}) — skipped`;
    screen.appendChild(note);
  }

  const item = flow.current();
  if (item !== null) {
    screen.appendChild(queueItemView(item, flow.decidedCount(), flow.total));
  } else if (flow.roundResuming()) {
    const done = document.createElement("p");
    done.className = "banner done";
    done.textContent = "queue complete — round resuming";
    screen.appendChild(done);
  } else if (flow.total === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "Nothing is waiting for labels.";
    screen.appendChild(empty);
  } else {
    const waiting = document.createElement("p");
    waiting.className = "banner";
    waiting.textContent = "submitting remaining decisions…";
    screen.appendChild(waiting);
  }
  return screen;
}
