/**
 * Scripted end-to-end session against the real Python service: label a full
 * floor(n/r) batch, watch the round increment, finish an (n=12, r=3) session,
 * and export exactly 12 rows.
 */

import { spawn, spawnSync } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { LabelingConsole } from "../src/console.js";

const PORT = 18750 + (process.pid % 1000);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let workdir: string;

async function serverReady(): Promise<void> {
  for (let i = 0; i < 100; i += 1) {
    try {
      const resp = await fetch(`${BASE}/datasets`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("labeling service did not come up");
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "alconsole-"));
  const dataDir = join(workdir, "data");
  const gen = spawnSync(
    "python3",
    [
      "-m", "activelabel.cli", "gen-data",
      "--k", "3", "--dim", "2", "--per-class", "40",
      "--separation", "2.5", "--seed", "2",
      "--out", join(dataDir, "toy.json"), "--name", "toy",
    ],
    { encoding: "utf8" },
  );
  if (gen.status !== 0) {
    throw new Error(`gen-data failed: ${gen.stderr}`);
  }
  server = spawn(
    "python3",
    [
      "-m", "activelabel.cli", "serve",
      "--data-dir", dataDir,
      "--state-dir", join(workdir, "state"),
      "--port", String(PORT),
    ],
    { stdio: "ignore" },
  );
  await serverReady();
});

afterAll(() => {
  server?.kill();
  rmSync(workdir, { recursive: true, force: true });
});

describe("browser round trip against the live service", () => {
  it("labels through a whole (n=12, r=3) session and exports 12 rows", async () => {
    const create = await fetch(`${BASE}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        dataset: "toy",
        n: 12,
        r: 3,
        seed: 3,
        schedule: { epochs: 3, batch_size: 8 },
      }),
    });
    expect(create.status).toBe(201);
    const session = await create.json();
    const batchSize = session.pending.length;
    expect(batchSize).toBe(4); // floor(12/3)

    const root = document.createElement("div");
    document.body.appendChild(root);
    const console_ = new LabelingConsole(root, new Client(BASE), session.session_id);
    await console_.start();
    expect(root.querySelector("#round-counter")?.textContent).toBe("round 1 of 3");

    // label the full first batch through the console UI
    for (let i = 0; i < batchSize; i += 1) {
      await console_.labelCurrent(i % 3);
    }
    expect(root.querySelector("#round-counter")?.textContent).toBe("round 2 of 3");
    expect(root.querySelector("#label-counter")?.textContent).toBe("4/12 labeled");

    // drive the remaining rounds to completion
    while (console_.status() === "awaiting_labels") {
      await console_.labelCurrent(1);
    }
    expect(console_.status()).toBe("complete");
    expect(root.querySelector("#export")).toBeTruthy();

    const csv = await new Client(BASE).fetchExport(session.session_id);
    const lines = csv.trim().split("\n");
    expect(lines[0]).toBe("id,f_1,f_2,label,round,source,status");
    expect(lines).toHaveLength(1 + 12);
    expect(lines.every((line, i) => i === 0 || line.endsWith(",human,complete"))).toBe(true);
  });

  it("reload reconstructs the console from API reads alone", async () => {
    const create = await fetch(`${BASE}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        dataset: "toy", n: 6, r: 2, seed: 9, schedule: { epochs: 2, batch_size: 8 },
      }),
    });
    const session = await create.json();

    const first = document.createElement("div");
    const c1 = new LabelingConsole(first, new Client(BASE), session.session_id);
    await c1.start();
    await c1.labelCurrent(0); // one label, then "close the tab"

    const second = document.createElement("div");
    const c2 = new LabelingConsole(second, new Client(BASE), session.session_id);
    await c2.start();
    expect(second.querySelector("#label-counter")?.textContent).toBe("1/6 labeled");
    expect(second.querySelectorAll(".class-button").length).toBe(3);
  });
});
