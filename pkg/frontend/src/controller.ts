/** Judging-loop state machine, kept free of DOM concerns for testability.
 *
 * Holds the pair on screen plus one prefetched pair so the operator never
 * waits on the network between judgments. Each presented pair can be judged
 * at most once: judging (or skipping) immediately advances to the prefetched
 * pair. Judgments flow through the retention queue with a client-generated
 * ref, so flaky networks delay but never lose them.
 */

import type { ApiClient } from "./api.js";
import type { JudgmentQueue } from "./queue.js";
import type { Pair } from "./types.js";

export type Side = "left" | "right";

function makeRef(): string {
  const rand =
    globalThis.crypto && "randomUUID" in globalThis.crypto
      ? globalThis.crypto.randomUUID()
      : Math.random().toString(36).slice(2);
  return `ui-${Date.now()}-${rand}`;
}

export class ComparisonController {
  current: Pair | null = null;
  private next: Pair | null = null;
  judged = 0;
  skipped = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly queue: JudgmentQueue,
    private readonly session: string,
  ) {}

  async start(): Promise<void> {
    this.current = await this.api.getPair();
    this.prefetch();
  }

  private prefetch(): void {
    void this.api
      .getPair()
      .then((pair) => {
        this.next = pair;
      })
      .catch(() => {
        this.next = null; // advance() falls back to a direct fetch
      });
  }

  private async advance(): Promise<void> {
    if (this.next) {
      this.current = this.next;
      this.next = null;
    } else {
      this.current = await this.api.getPair().catch(() => null);
    }
    this.prefetch();
  }

  /** Judge the pair on screen; returns "sent" or "queued" (offline).
   * A server-side validation rejection still advances to the next pair
   * (the judgment is unsendable as-is) but propagates to the caller. */
  async judge(side: Side): Promise<"sent" | "queued" | "no-pair"> {
    const pair = this.current;
    if (!pair) return "no-pair";
    this.current = null; // a pair is judged at most once
    const winner = side === "left" ? pair.a.id : pair.b.id;
    const loser = side === "left" ? pair.b.id : pair.a.id;
    try {
      const outcome = await this.queue.submit({
        winner,
        loser,
        session: this.session,
        ref: makeRef(),
      });
      this.judged += 1;
      return outcome;
    } finally {
      await this.advance();
    }
  }

  /** Skip the pair on screen: audit-logged server-side, no ranking evidence.
   * Best effort; a network failure only advances the UI. */
  async skip(): Promise<void> {
    const pair = this.current;
    if (!pair) return;
    this.current = null;
    this.skipped += 1;
    try {
      await this.api.postSkip(pair.a.id, pair.b.id, this.session);
    } catch {
      /* skips carry no evidence; losing one is acceptable */
    }
    await this.advance();
  }
}
