/**
 * The labeling console: works through the pending batch one item at a time,
 * posts labels, and reflects round progress. All state of record lives on the
 * server; a reload reconstructs this view from API reads alone.
 */

import { ApiError, Client } from "./api.js";
import type { ApiSession, SessionMetrics } from "./api.js";
import { renderMetricsChart } from "./chart.js";
import { LabelQueue } from "./queue.js";
import { renderItemView } from "./scatter.js";

export class LabelingConsole {
  private session: ApiSession | null = null;
  private metrics: SessionMetrics | null = null;
  private queue = new LabelQueue();
  private notice = "";
  private offline = false;
  private training = false;

  constructor(
    private root: HTMLElement,
    private client: Client,
    private sessionId: string,
  ) {}

  async start(): Promise<void> {
    await this.refresh();
  }

  /** Re-read everything from the server (also the reload/recovery path). */
  async refresh(): Promise<void> {
    try {
      this.session = await this.client.getSession(this.sessionId);
      this.metrics = await this.client.getMetrics(this.sessionId);
      this.queue.load(this.session.pending);
      this.offline = false;
    } catch (err) {
      if (err instanceof ApiError) {
        this.notice = `server error: ${err.message}`;
      } else {
        this.offline = true;
      }
    }
    this.render();
  }

  currentSampleId(): number | null {
    return this.queue.current().item?.sample_id ?? null;
  }

  /** True when there is nothing to label locally (safe to poll-refresh). */
  idle(): boolean {
    return this.queue.remaining === 0 && !this.queue.inFlight;
  }

  status(): string {
    return this.session?.status ?? "unknown";
  }

  round(): number {
    return this.session?.round ?? 0;
  }

  next(): void {
    this.queue.next();
    this.render();
  }

  previous(): void {
    this.queue.previous();
    this.render();
  }

  /** Label the item under review. Double submissions are swallowed. */
  async labelCurrent(classId: number): Promise<void> {
    if (!this.session || this.session.status !== "awaiting_labels") {
      return;
    }
    const item = this.queue.claim();
    if (item === null) {
      return; // another submission is in flight
    }
    const lastOfBatch = this.queue.remaining === 1;
    if (lastOfBatch) {
      this.training = true;
      this.render();
    }
    try {
      const updated = await this.client.postLabel(this.sessionId, item.sample_id, classId);
      const advanced = updated.round !== this.session.round || updated.status !== this.session.status;
      this.session = updated;
      this.notice = "";
      if (advanced) {
        this.queue.load(updated.pending);
        this.metrics = await this.client.getMetrics(this.sessionId);
      } else {
        this.queue.settle(item.sample_id);
      }
      this.offline = false;
    } catch (err) {
      if (err instanceof ApiError) {
        this.queue.reject(item.sample_id, `${err.code}: ${err.message}`);
        this.notice = `label rejected (${err.code}); item kept in queue`;
      } else {
        this.queue.reject(item.sample_id, "network error");
        this.offline = true;
      }
    } finally {
      this.training = false;
    }
    this.render();
  }

  render(): void {
    const s = this.session;
    if (!s) {
      this.root.innerHTML = this.offline
        ? `<div class="banner banner-offline">server unreachable; retrying will not lose any work</div>`
        : `<div class="banner">loading…</div>`;
      return;
    }
    const view = this.queue.current();
    const flag = view.item ? this.queue.flagOf(view.item.sample_id) : undefined;
    const banner = this.offline
      ? `<div class="banner banner-offline">server unreachable; the session state is safe server-side</div>`
      : this.notice
        ? `<div class="banner banner-error">${this.notice}</div>`
        : "";
    const trainingBadge = this.training
      ? `<span class="badge badge-training">training…</span>`
      : "";
    const header = `
      <header id="header">
        <h1>session ${s.session_id}</h1>
        <span id="round-counter">round ${s.round} of ${s.rounds_total}</span>
        <span id="label-counter">${s.labeled_count}/${s.budget} labeled</span>
        <span id="status" class="badge badge-${s.status}">${s.status}</span>
        ${trainingBadge}
      </header>`;

    let work: string;
    if (s.status === "complete") {
      work = `
        <section class="panel" id="work">
          <p>All ${s.budget} labels purchased. The constructed training set is ready.</p>
          <a id="export" class="button" href="${this.client.exportUrl(s.session_id)}" download>export dataset (CSV)</a>
        </section>`;
    } else if (view.item) {
      const buttons = s.class_names
        .map(
          (name, k) =>
            `<button class="class-button" data-class="${k}">` +
            `<kbd>${k}</kbd> ${name}</button>`,
        )
        .join("");
      work = `
        <section class="panel" id="work">
          <div id="queue-position">item ${view.position} of ${view.remaining} in this batch
            (sample ${view.item.sample_id})</div>
          ${flag ? `<div class="banner banner-error" id="item-flag">${flag} — choose a class to retry</div>` : ""}
          <div id="item-view">${renderItemView(s.pending, view.item)}</div>
          <div id="class-buttons">${buttons}</div>
          <div class="hint">digit keys label, ←/→ skip around the batch</div>
        </section>`;
    } else {
      work = `<section class="panel" id="work"><p>waiting for the next batch…</p></section>`;
    }

    const dashboard = `
      <section class="panel" id="dashboard">
        <h2>progress</h2>
        ${this.metrics ? renderMetricsChart(this.metrics) : "<p>no metrics yet</p>"}
      </section>`;

    this.root.innerHTML = `${banner}${header}${work}${dashboard}`;
    this.root.querySelectorAll<HTMLButtonElement>(".class-button").forEach((btn) => {
      btn.addEventListener("click", () => {
        void this.labelCurrent(Number(btn.dataset.class));
      });
    });
  }
}
