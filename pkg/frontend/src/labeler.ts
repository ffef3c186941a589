/** Labeling flow for one session's queue.
 *
 * Every decision is posted on its own as soon as it is made; pairs the
 * service refuses with 409 (already resolved elsewhere) are skipped
 * without losing any other decision, and a network failure keeps the
 * affected decisions staged for retry.
 */

import { ApiError, Client } from "./api.js";
import type { LabelReceipt, QueueItem } from "./types.js";

export const DUPLICATE = 1;
export const NON_DUPLICATE = 0;

interface Staged {
  item: QueueItem;
  label: number;
}

export interface Conflict {
  pair: [number, number];
  detail: string;
}

export class LabelFlow {
  private items: QueueItem[] = [];
  private staged: Staged[] = [];
  private flushing = false;

  submitted = 0;
  skipped = 0;
  total = 0;
  conflicts: Conflict[] = [];
  lastError: string | null = null;
  lastReceipt: LabelReceipt | null = null;

  constructor(
    private client: Client,
    private sessionId: string,
    private onChange: () => void = () => {},
  ) {}

  /** Fetch the pairs still awaiting a decision. */
  async load(): Promise<void> {
    this.items = await this.client.queue(this.sessionId);
    this.total = this.submitted + this.skipped + this.staged.length + this.items.length;
    this.onChange();
  }

  /** The pair currently on screen, or null once the queue is drained. */
  current(): QueueItem | null {
    return this.items[0] ?? null;
  }

  decidedCount(): number {
    return this.submitted + this.skipped + this.staged.length;
  }

  /** True when every fetched pair has been decided and submitted. */
  exhausted(): boolean {
    return this.items.length === 0 && this.staged.length === 0 && this.total > 0;
  }

  /** True when the service reported an empty remaining queue, meaning
   * the round is resuming on the trainer side. */
  roundResuming(): boolean {
    return this.exhausted() && this.lastReceipt !== null && this.lastReceipt.remaining === 0;
  }

  /** Record a decision for the current pair and submit it at once. */
  decide(label: number): void {
    const item = this.items.shift();
    if (item === undefined) {
      return;
    }
    this.staged.push({ item, label });
    this.onChange();
    void this.flush();
  }

  /** Take back the newest decision whose submission has not started.
   *
   * Returns false when there is nothing left to recall — decisions
   * already on the wire or accepted by the service stay put.
   */
  undo(): boolean {
    const floor = this.flushing ? 1 : 0;
    if (this.staged.length <= floor) {
      return false;
    }
    const last = this.staged.pop()!;
    this.items.unshift(last.item);
    this.onChange();
    return true;
  }

  /** Resume submitting after a failure reported in `lastError`. */
  retry(): void {
    this.lastError = null;
    this.onChange();
    void this.flush();
  }

  private async flush(): Promise<void> {
    if (this.flushing || this.lastError !== null) {
      return;
    }
    this.flushing = true;
    try {
      while (this.staged.length > 0) {
        const head = this.staged[0]!;
        const [r_id, s_id] = head.item.pair;
        try {
          this.lastReceipt = await this.client.submit(this.sessionId, {
            r_id,
            s_id,
            label: head.label,
          });
          this.submitted += 1;
        } catch (err) {
          if (err instanceof ApiError && err.status === 409) {
            this.skipped += 1;
            this.conflicts.push({ pair: head.item.pair, detail: err.message });
          } else {
            this.lastError = err instanceof Error ? err.message : String(err);
            this.onChange();
            return;
          }
        }
        this.staged.shift();
        this.onChange();
      }
    } finally {
      this.flushing = false;
    }
  }
}
