/** Session dashboard: list, per-session metrics and round control.
 *
 * Every number shown here is read straight from a service response;
 * the page keeps no truth of its own.
 */

import { chartLegend, metricsChart } from "./chart.js";
import type { MetricsRow, SessionDetail, SessionSummary } from "./types.js";

export function fmtScore(value: number | null): string {
  return value === null ? "—" : value.toFixed(3);
}

function cell(row: HTMLTableRowElement, text: string, cls?: string): void {
  const td = document.createElement("td");
  td.textContent = text;
  if (cls) {
    td.className = cls;
  }
  row.appendChild(td);
}

function headerRow(table: HTMLTableElement, columns: string[]): void {
  const thead = document.createElement("thead");
  const tr = document.createElement("tr");
  for (const column of columns) {
    const th = document.createElement("th");
    th.textContent = column;
    tr.appendChild(th);
  }
  thead.appendChild(tr);
  table.appendChild(thead);
}

/** Banner with a retry control, shown when the service is unreachable. */
export function retryBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = document.createElement("div");
  banner.className = "banner error";
  const text = document.createElement("span");
  text.textContent = `service unreachable: ${message}`;
  banner.appendChild(text);
  const button = document.createElement("button");
  button.textContent = "Retry";
  button.addEventListener("click", onRetry);
  banner.appendChild(button);
  return banner;
}

/** One row per session with status and its latest scores. */
export function sessionTable(
  sessions: SessionSummary[],
  onOpen: (id: string) => void,
): HTMLElement {
  const wrap = document.createElement("div");
  if (sessions.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "No sessions yet. Create one with the service API or the CLI.";
    wrap.appendChild(empty);
    return wrap;
  }
  const table = document.createElement("table");
  table.className = "sessions";
  headerRow(table, [
    "session",
    "status",
    "round",
    "labeled",
    "recall_cand",
    "F1 (test)",
    "F1 (all)",
    "",
  ]);
  const tbody = document.createElement("tbody");
  for (const session of sessions) {
    const tr = document.createElement("tr");
    tr.dataset["id"] = session.id;
    cell(tr, session.id, "mono");
    cell(tr, session.status, `status status-${session.status}`);
    cell(tr, `${session.round} / ${session.rounds}`);
    cell(tr, String(session.labeled));
    cell(tr, fmtScore(session.recall_cand));
    cell(tr, fmtScore(session.f1_test));
    cell(tr, fmtScore(session.f1_all));
    const td = document.createElement("td");
    const open = document.createElement("a");
    open.href = `#/sessions/${session.id}`;
    open.textContent = "open";
    open.addEventListener("click", event => {
      event.preventDefault();
      onOpen(session.id);
    });
    td.appendChild(open);
    tr.appendChild(td);
    tbody.appendChild(tr);
  }
  table.appendChild(tbody);
  wrap.appendChild(table);
  return wrap;
}

/** Per-round metrics, one table row per round in service order. */
export function metricsTable(rows: MetricsRow[]): HTMLTableElement {
  const table = document.createElement("table");
  table.className = "metrics";
  headerRow(table, [
    "round",
    "labeled",
    "recall_cand",
    "P (test)",
    "R (test)",
    "F1 (test)",
    "P (all)",
    "R (all)",
    "F1 (all)",
  ]);
  const tbody = document.createElement("tbody");
  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.dataset["round"] = String(row.round);
    cell(tr, String(row.round));
    cell(tr, String(row.labeled));
    cell(tr, fmtScore(row.recall_cand));
    cell(tr, fmtScore(row.test.p));
    cell(tr, fmtScore(row.test.r));
    cell(tr, fmtScore(row.test.f1));
    cell(tr, fmtScore(row.all.p));
    cell(tr, fmtScore(row.all.r));
    cell(tr, fmtScore(row.all.f1));
    tbody.appendChild(tr);
  }
  table.appendChild(tbody);
  return table;
}

export interface DetailHandlers {
  onAdvance: () => void;
  onLabel: () => void;
}

/** Full session panel: status line, metrics table, chart, controls. */
export function sessionPanel(detail: SessionDetail, handlers: DetailHandlers): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "session-panel";

  const heading = document.createElement("h2");
  heading.textContent = `session ${detail.id}`;
  panel.appendChild(heading);

  const statusLine = document.createElement("p");
  statusLine.className = "status-line";
  statusLine.textContent =
    `status ${detail.status} · round ${detail.round} of ${detail.rounds}` +
    ` · ${detail.labeled} labeled · budget ${detail.budget}/round`;
  panel.appendChild(statusLine);

  if (detail.error) {
    const err = document.createElement("p");
    err.className = "banner error";
    err.textContent = `last round failed: ${detail.error}`;
    panel.appendChild(err);
  }

  const controls = document.createElement("p");
  controls.className = "controls";
  const advance = document.createElement("button");
  advance.textContent = "Advance round";
  advance.disabled = detail.status !== "idle";
  advance.addEventListener("click", handlers.onAdvance);
  controls.appendChild(advance);
  if (detail.status === "awaiting_labels") {
    const label = document.createElement("button");
    label.textContent = `Label ${detail.pending} pairs`;
    label.addEventListener("click", handlers.onLabel);
    controls.appendChild(label);
  }
  panel.appendChild(controls);

  if (detail.metrics.length > 0) {
    panel.appendChild(metricsTable(detail.metrics));
    panel.appendChild(metricsChart(detail.metrics));
    panel.appendChild(chartLegend());
  } else {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "No completed rounds yet.";
    panel.appendChild(empty);
  }
  return panel;
}
