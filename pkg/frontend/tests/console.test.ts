/**
 * Console behavior against an in-memory fake of the labeling service:
 * round progress, double-submit de-duplication, and 409 retry affordances.
 */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { ApiSession, PendingItem } from "../src/api.js";
import { Client } from "../src/api.js";
import { LabelingConsole } from "../src/console.js";

class FakeServer {
  round = 1;
  labeled = 0;
  readonly roundsTotal = 2;
  readonly budget = 4;
  pending: PendingItem[] = [
    { sample_id: 1, features: [0.0, 0.0] },
    { sample_id: 2, features: [1.0, 1.0] },
  ];
  answered = new Set<number>();

  session(): ApiSession {
    return {
      session_id: "s000001",
      status: this.labeled >= this.budget ? "complete" : "awaiting_labels",
      round: this.round,
      rounds_total: this.roundsTotal,
      labeled_count: this.labeled,
      budget: this.budget,
      class_names: ["class 0", "class 1", "class 2"],
      pending: this.pending.filter((p) => !this.answered.has(p.sample_id)),
    };
  }

  label(sampleId: number, classId: number): { status: number; body: unknown } {
    const pendingIds = this.session().pending.map((p) => p.sample_id);
    if (!pendingIds.includes(sampleId)) {
      return { status: 409, body: { error: "not_pending", detail: `sample ${sampleId}` } };
    }
    if (classId < 0 || classId > 2) {
      return { status: 422, body: { error: "class_out_of_range", detail: `class ${classId}` } };
    }
    this.answered.add(sampleId);
    this.labeled += 1;
    if (this.session().pending.length === 0 && this.labeled < this.budget) {
      this.round += 1;
      this.pending = [
        { sample_id: 10 + this.round, features: [2.0, 2.0] },
        { sample_id: 20 + this.round, features: [3.0, 3.0] },
      ];
      this.answered.clear();
    }
    return { status: 200, body: this.session() };
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const json = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), { status, headers: { "Content-Type": "application/json" } });
    if (url.endsWith("/metrics")) {
      return json({
        session_id: "s000001",
        status: this.session().status,
        round: this.round,
        initial: { round: 0, labeled_total: 0, holdout_accuracy: 0.25, mean_pool_uncertainty: 0.7 },
        history: [],
      });
    }
    if (url.endsWith("/labels") && init?.method === "POST") {
      const [entry] = JSON.parse(init.body as string) as Array<{ sample_id: number; class_id: number }>;
      const { status, body } = this.label(entry.sample_id, entry.class_id);
      return json(body, status);
    }
    return json(this.session());
  };
}

let server: FakeServer;
let root: HTMLElement;
let console_: LabelingConsole;

beforeEach(async () => {
  server = new FakeServer();
  vi.stubGlobal("fetch", server.fetch);
  root = document.createElement("div");
  document.body.appendChild(root);
  console_ = new LabelingConsole(root, new Client(""), "s000001");
  await console_.start();
});

afterEach(() => {
  vi.unstubAllGlobals();
  document.body.innerHTML = "";
});

describe("LabelingConsole", () => {
  it("renders the session header and the first item", () => {
    expect(root.querySelector("#round-counter")?.textContent).toBe("round 1 of 2");
    expect(root.querySelector("#label-counter")?.textContent).toBe("0/4 labeled");
    expect(root.querySelectorAll(".class-button")).toHaveLength(3);
    expect(root.querySelector("#queue-position")?.textContent).toContain("sample 1");
    expect(root.querySelector("svg.scatter")).toBeTruthy();
  });

  it("labeling the last pending item advances the round counter", async () => {
    await console_.labelCurrent(0);
    expect(root.querySelector("#round-counter")?.textContent).toBe("round 1 of 2");
    await console_.labelCurrent(1);
    expect(root.querySelector("#round-counter")?.textContent).toBe("round 2 of 2");
    expect(root.querySelector("#label-counter")?.textContent).toBe("2/4 labeled");
  });

  it("double submission produces a single effective label", async () => {
    const first = console_.labelCurrent(0);
    const second = console_.labelCurrent(0); // double click while in flight
    await Promise.all([first, second]);
    expect(server.labeled).toBe(1);
  });

  it("a 409 flags the item and keeps its queue position", async () => {
    server.answered.add(1); // someone else answered it meanwhile
    await console_.labelCurrent(0);
    expect(console_.currentSampleId()).toBe(1);
    expect(root.querySelector("#item-flag")?.textContent).toContain("not_pending");
    expect(server.labeled).toBe(0);
  });

  it("a completed session enables export", async () => {
    for (let i = 0; i < 4; i += 1) {
      await console_.labelCurrent(2);
    }
    expect(console_.status()).toBe("complete");
    const exportLink = root.querySelector<HTMLAnchorElement>("#export");
    expect(exportLink).toBeTruthy();
    expect(exportLink!.getAttribute("href")).toBe("/sessions/s000001/export");
  });

  it("never renders ground truth anywhere", async () => {
    expect(root.innerHTML).not.toContain("true_label");
  });
});
