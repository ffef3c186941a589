/** Entry point: hash routing between the dashboard, one session's
 * panel and its label screen, polling the service for fresh state. */

import { Client } from "./api.js";
import { retryBanner, sessionPanel, sessionTable } from "./dashboard.js";
import { bindKeys } from "./keyboard.js";
import { DUPLICATE, LabelFlow, NON_DUPLICATE } from "./labeler.js";
import { labelScreen } from "./labelView.js";

const REFRESH_SECONDS = 3;

const app = document.getElementById("app")!;
const client = new Client(document.body.dataset["api"] ?? "");

let unbindKeys: (() => void) | null = null;
let refreshTimer: number | null = null;

function swap(node: HTMLElement): void {
  app.replaceChildren(node);
}

function schedule(fn: () => void): void {
  if (refreshTimer !== null) {
    window.clearTimeout(refreshTimer);
  }
  refreshTimer = window.setTimeout(fn, REFRESH_SECONDS * 1000);
}

function leaveScreen(): void {
  if (unbindKeys !== null) {
    unbindKeys();
    unbindKeys = null;
  }
  if (refreshTimer !== null) {
    window.clearTimeout(refreshTimer);
    refreshTimer = null;
  }
}

async function showDashboard(): Promise<void> {
  try {
    const sessions = await client.sessions();
    swap(sessionTable(sessions, id => {
      window.location.hash = `#/sessions/${id}`;
    }));
  } catch (err) {
    const detail = err instanceof Error ? err.message : String(err);
    swap(retryBanner(detail, () => void showDashboard()));
  }
  schedule(() => void showDashboard());
}

async function showSession(id: string): Promise<void> {
  try {
    const detail = await client.session(id);
    swap(sessionPanel(detail, {
      onAdvance: () => {
        void client.advance(id).then(() => showSession(id));
      },
      onLabel: () => {
        window.location.hash = `#/sessions/${id}/label`;
      },
    }));
    if (detail.status !== "awaiting_labels" && detail.status !== "done") {
      schedule(() => void showSession(id));
    }
  } catch (err) {
    const detail = err instanceof Error ? err.message : String(err);
    swap(retryBanner(detail, () => void showSession(id)));
    schedule(() => void showSession(id));
  }
}

async function showLabelScreen(id: string): Promise<void> {
  const flow = new LabelFlow(client, id, () => {
    swap(labelScreen(flow, () => flow.retry()));
    if (flow.roundResuming()) {
      // Give the notice a beat, then fall back to the session panel.
      schedule(() => {
        window.location.hash = `#/sessions/${id}`;
      });
    }
  });
  unbindKeys = bindKeys(document, {
    d: () => flow.decide(DUPLICATE),
    n: () => flow.decide(NON_DUPLICATE),
    u: () => flow.undo(),
  });
  try {
    await flow.load();
  } catch (err) {
    const detail = err instanceof Error ? err.message : String(err);
    swap(retryBanner(detail, () => void showLabelScreen(id)));
  }
}

function route(): void {
  leaveScreen();
  const hash = window.location.hash;
  const label = hash.match(/^#\/sessions\/([^/]+)\/label$/);
  if (label !== null) {
    void showLabelScreen(label[1]!);
    return;
  }
  const session = hash.match(/^#\/sessions\/([^/]+)$/);
  if (session !== null) {
    void showSession(session[1]!);
    return;
  }
  void showDashboard();
}

window.addEventListener("hashchange", route);
route();
