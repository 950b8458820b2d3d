/** Never-lose-a-judgment submission queue.
 *
 * A judgment is first tried against the server; on any network failure it is
 * retained (and optionally persisted) until a later flush succeeds. Each
 * judgment carries a client-generated ref the server deduplicates on, so a
 * retry after a lost acknowledgment cannot double-log. Flushing preserves
 * submission order and stops at the first failure, leaving the remainder
 * queued.
 */

import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import type { Judgment } from "./types.js";

export interface QueueStorage {
  load(): Judgment[];
  save(items: Judgment[]): void;
}

export class JudgmentQueue {
  private pending: Judgment[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly storage?: QueueStorage,
  ) {
    if (storage) this.pending = storage.load();
  }

  get size(): number {
    return this.pending.length;
  }

  get pendingItems(): readonly Judgment[] {
    return this.pending;
  }

  private persist(): void {
    this.storage?.save(this.pending);
  }

  /** Submit one judgment; returns "sent" on acknowledgment or "queued" when
   * the server was unreachable. Rejections the server *did* process (4xx
   * validation errors) are not queued: retrying them verbatim cannot
   * succeed, so they propagate to the caller instead. */
  async submit(judgment: Judgment): Promise<"sent" | "queued"> {
    if (this.pending.length > 0) {
      // Preserve order: never let a fresh judgment overtake queued ones.
      this.pending.push(judgment);
      this.persist();
      await this.flush().catch(() => undefined);
      return this.pending.length === 0 ? "sent" : "queued";
    }
    try {
      await this.api.postComparison(judgment);
      return "sent";
    } catch (err) {
      if (err instanceof ApiError && err.status < 500) throw err;
      this.pending.push(judgment);
      this.persist();
      return "queued";
    }
  }

  /** Send queued judgments in order; stops at the first network failure.
   * Returns how many were acknowledged this call. */
  async flush(): Promise<number> {
    let sent = 0;
    while (this.pending.length > 0) {
      const head = this.pending[0];
      try {
        await this.api.postComparison(head);
      } catch (err) {
        if (err instanceof ApiError && err.status < 500) {
          // The server examined and rejected it; keeping it would wedge the
          // queue forever. Drop it loudly.
          this.pending.shift();
          this.persist();
          throw err;
        }
        this.persist();
        return sent;
      }
      this.pending.shift();
      this.persist();
      sent += 1;
    }
    return sent;
  }
}

/** localStorage-backed persistence so queued judgments survive reloads. */
export class LocalQueueStorage implements QueueStorage {
  constructor(
    private readonly key: string = "interestboard.judgment-queue",
    private readonly backend: Pick<Storage, "getItem" | "setItem"> = localStorage,
  ) {}

  load(): Judgment[] {
    try {
      const raw = this.backend.getItem(this.key);
      return raw ? (JSON.parse(raw) as Judgment[]) : [];
    } catch {
      return [];
    }
  }

  save(items: Judgment[]): void {
    this.backend.setItem(this.key, JSON.stringify(items));
  }
}
