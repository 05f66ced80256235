/**
 * SVG scatter of the pending batch in feature space (first two dimensions),
 * with the item under review highlighted.
 */

import type { PendingItem } from "./api.js";

const W = 360;
const H = 280;
const PAD = 24;

function extent(values: number[]): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  return lo === hi ? [lo - 1, hi + 1] : [lo, hi];
}

export function renderScatter(items: PendingItem[], currentId: number): string {
  const pts = items.filter((it) => it.features && it.features.length >= 1);
  if (pts.length === 0) {
    return `<svg viewBox="0 0 ${W} ${H}" class="scatter"></svg>`;
  }
  const xs = pts.map((p) => p.features![0]);
  const ys = pts.map((p) => (p.features!.length > 1 ? p.features![1] : 0));
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const sx = (v: number) => PAD + ((v - x0) / (x1 - x0)) * (W - 2 * PAD);
  const sy = (v: number) => H - PAD - ((v - y0) / (y1 - y0)) * (H - 2 * PAD);

  const dots = pts
    .map((p, i) => {
      const cx = sx(xs[i]).toFixed(1);
      const cy = sy(ys[i]).toFixed(1);
      if (p.sample_id === currentId) {
        return (
          `<circle cx="${cx}" cy="${cy}" r="9" class="dot-current-ring"></circle>` +
          `<circle cx="${cx}" cy="${cy}" r="4.5" class="dot-current"></circle>`
        );
      }
      return `<circle cx="${cx}" cy="${cy}" r="3.5" class="dot"></circle>`;
    })
    .join("");
  return `<svg viewBox="0 0 ${W} ${H}" class="scatter" role="img" aria-label="pending batch scatter">${dots}</svg>`;
}

export function renderItemView(items: PendingItem[], current: PendingItem): string {
  if (current.display_ref) {
    return `<img class="item-image" src="${current.display_ref}" alt="sample ${current.sample_id}">`;
  }
  return renderScatter(items, current.sample_id);
}
