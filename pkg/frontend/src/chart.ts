/**
 * SVG line chart of the per-round session metrics: holdout accuracy and mean
 * pool uncertainty, round 0 being the post-warmup baseline.
 */

import type { SessionMetrics } from "./api.js";

const W = 360;
const H = 180;
const PAD = 26;

function polyline(values: number[], rounds: number[], maxRound: number, cls: string): string {
  const sx = (r: number) => PAD + (maxRound === 0 ? 0 : (r / maxRound) * (W - 2 * PAD));
  const sy = (v: number) => H - PAD - v * (H - 2 * PAD); // both series live in [0, 1]
  const points = values.map((v, i) => `${sx(rounds[i]).toFixed(1)},${sy(v).toFixed(1)}`).join(" ");
  const markers = values
    .map((v, i) => `<circle cx="${sx(rounds[i]).toFixed(1)}" cy="${sy(v).toFixed(1)}" r="2.5" class="${cls}"></circle>`)
    .join("");
  return `<polyline points="${points}" class="${cls}"></polyline>${markers}`;
}

export function renderMetricsChart(metrics: SessionMetrics): string {
  const all = [metrics.initial, ...metrics.history];
  const rounds = all.map((m) => m.round);
  const maxRound = Math.max(...rounds, 1);
  const acc = polyline(all.map((m) => m.holdout_accuracy), rounds, maxRound, "line-accuracy");
  const unc = polyline(all.map((m) => m.mean_pool_uncertainty), rounds, maxRound, "line-uncertainty");
  const axis =
    `<line x1="${PAD}" y1="${H - PAD}" x2="${W - PAD}" y2="${H - PAD}" class="axis"></line>` +
    `<line x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${H - PAD}" class="axis"></line>`;
  return (
    `<svg viewBox="0 0 ${W} ${H}" class="chart" role="img" aria-label="per-round metrics">` +
    `${axis}${acc}${unc}</svg>` +
    `<div class="legend"><span class="legend-accuracy">accuracy</span>` +
    `<span class="legend-uncertainty">mean uncertainty</span></div>`
  );
}
