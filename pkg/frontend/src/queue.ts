/**
 * Pure queue logic for working through one pending batch: which item is up,
 * which items failed and need a retry, and a single-submission guard so a
 * double-click cannot label the same item twice.
 */

import type { PendingItem } from "./api.js";

export interface QueueView {
  item: PendingItem | null;
  position: number; // 1-based position among remaining items
  remaining: number;
}

export class LabelQueue {
  private items: PendingItem[] = [];
  private index = 0;
  private busy = false;
  private flags = new Map<number, string>();

  load(items: PendingItem[]): void {
    this.items = [...items];
    this.index = 0;
    this.busy = false;
    this.flags.clear();
  }

  get remaining(): number {
    return this.items.length;
  }

  get inFlight(): boolean {
    return this.busy;
  }

  current(): QueueView {
    if (this.items.length === 0) {
      return { item: null, position: 0, remaining: 0 };
    }
    return {
      item: this.items[this.index],
      position: this.index + 1,
      remaining: this.items.length,
    };
  }

  next(): void {
    if (this.items.length > 0) {
      this.index = (this.index + 1) % this.items.length;
    }
  }

  previous(): void {
    if (this.items.length > 0) {
      this.index = (this.index - 1 + this.items.length) % this.items.length;
    }
  }

  /** Claim the current item for submission; null while another is in flight. */
  claim(): PendingItem | null {
    if (this.busy || this.items.length === 0) {
      return null;
    }
    this.busy = true;
    return this.items[this.index];
  }

  /** A claimed submission succeeded: drop the item, keep queue position. */
  settle(sampleId: number): void {
    this.busy = false;
    const at = this.items.findIndex((it) => it.sample_id === sampleId);
    if (at >= 0) {
      this.items.splice(at, 1);
      if (this.index >= this.items.length) {
        this.index = 0;
      }
    }
    this.flags.delete(sampleId);
  }

  /** A claimed submission failed: flag the item, preserve its queue position. */
  reject(sampleId: number, message: string): void {
    this.busy = false;
    this.flags.set(sampleId, message);
  }

  flagOf(sampleId: number): string | undefined {
    return this.flags.get(sampleId);
  }
}
