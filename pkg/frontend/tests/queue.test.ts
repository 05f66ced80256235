import { describe, expect, it } from "vitest";

import type { PendingItem } from "../src/api.js";
import { LabelQueue } from "../src/queue.js";

const items = (...ids: number[]): PendingItem[] =>
  ids.map((id) => ({ sample_id: id, features: [id, -id] }));

describe("LabelQueue", () => {
  it("walks the batch in order and wraps", () => {
    const q = new LabelQueue();
    q.load(items(5, 6, 7));
    expect(q.current().item?.sample_id).toBe(5);
    q.next();
    expect(q.current().item?.sample_id).toBe(6);
    q.next();
    q.next();
    expect(q.current().item?.sample_id).toBe(5);
    q.previous();
    expect(q.current().item?.sample_id).toBe(7);
  });

  it("claim blocks a second submission until settled", () => {
    const q = new LabelQueue();
    q.load(items(1, 2));
    const first = q.claim();
    expect(first?.sample_id).toBe(1);
    expect(q.claim()).toBeNull(); // double-click guard
    q.settle(1);
    expect(q.claim()?.sample_id).toBe(2);
  });

  it("settle removes the item and keeps counting down", () => {
    const q = new LabelQueue();
    q.load(items(1, 2, 3));
    q.claim();
    q.settle(1);
    expect(q.remaining).toBe(2);
    expect(q.current().item?.sample_id).toBe(2);
    q.claim();
    q.settle(2);
    q.claim();
    q.settle(3);
    expect(q.remaining).toBe(0);
    expect(q.current().item).toBeNull();
  });

  it("reject flags the item and preserves its queue position", () => {
    const q = new LabelQueue();
    q.load(items(1, 2, 3));
    const claimed = q.claim();
    q.reject(claimed!.sample_id, "409: not_pending");
    expect(q.remaining).toBe(3);
    expect(q.current().item?.sample_id).toBe(1);
    expect(q.flagOf(1)).toContain("409");
    // retry is possible immediately
    expect(q.claim()?.sample_id).toBe(1);
    q.settle(1);
    expect(q.flagOf(1)).toBeUndefined();
  });

  it("load resets flags and guard", () => {
    const q = new LabelQueue();
    q.load(items(1));
    q.claim();
    q.reject(1, "boom");
    q.load(items(9));
    expect(q.flagOf(1)).toBeUndefined();
    expect(q.inFlight).toBe(false);
    expect(q.current().item?.sample_id).toBe(9);
  });
});
