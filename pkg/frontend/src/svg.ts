/**
 * Minimal deterministic SVG builder for log-log charts: data polylines,
 * straight reference/fit lines, tick labels, and text annotations.  No DOM,
 * no dependencies; re-running on the same inputs yields identical bytes.
 */

export interface Series {
  x: number[];
  y: number[];
  color: string;
  label: string;
  width?: number;
  dash?: string;
  markers?: boolean;
}

export interface RefLine {
  /** log10(y) = slope * log10(x) + offset, drawn across the x-range */
  slope: number;
  offsetThrough: { x: number; y: number }; // anchor point the line passes through
  color: string;
  label: string;
  dash?: string;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  refLines?: RefLine[];
  annotations?: string[];
  width?: number;
  height?: number;
}

const MARGIN = { left: 70, right: 20, top: 40, bottom: 50 };

function fmt(v: number): string {
  return v.toFixed(2);
}

function niceTicks(lo: number, hi: number): number[] {
  // integer decades between floor(lo) and ceil(hi)
  const ticks: number[] = [];
  for (let d = Math.floor(lo); d <= Math.ceil(hi); d++) ticks.push(d);
  return ticks;
}

export function buildLogLogChart(spec: ChartSpec): string {
  const W = spec.width ?? 640;
  const H = spec.height ?? 440;
  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;

  const xs = spec.series.flatMap((s) => s.x).filter((v) => v > 0);
  const ys = spec.series.flatMap((s) => s.y).filter((v) => v > 0);
  if (xs.length === 0 || ys.length === 0) {
    throw new Error("no positive data to plot on log axes");
  }
  let x0 = Math.log10(Math.min(...xs));
  let x1 = Math.log10(Math.max(...xs));
  let y0 = Math.log10(Math.min(...ys));
  let y1 = Math.log10(Math.max(...ys));
  if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
  const padY = 0.05 * (y1 - y0);
  y0 -= padY; y1 += padY;

  const px = (lx: number) => MARGIN.left + ((lx - x0) / (x1 - x0)) * plotW;
  const py = (ly: number) => MARGIN.top + (1 - (ly - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" ` +
    `viewBox="0 0 ${W} ${H}" font-family="Helvetica,Arial,sans-serif">`,
  );
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  parts.push(
    `<text x="${W / 2}" y="20" text-anchor="middle" font-size="14">${spec.title}</text>`,
  );

  // axes frame
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
    `fill="none" stroke="#333" stroke-width="1"/>`,
  );
  for (const d of niceTicks(x0, x1)) {
    if (d < x0 || d > x1) continue;
    const x = px(d);
    parts.push(`<line x1="${fmt(x)}" y1="${MARGIN.top}" x2="${fmt(x)}" ` +
      `y2="${MARGIN.top + plotH}" stroke="#ddd" stroke-width="0.5"/>`);
    parts.push(`<text x="${fmt(x)}" y="${MARGIN.top + plotH + 16}" ` +
      `text-anchor="middle" font-size="10">1e${d}</text>`);
  }
  for (const d of niceTicks(y0, y1)) {
    if (d < y0 || d > y1) continue;
    const y = py(d);
    parts.push(`<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + plotW}" ` +
      `y2="${fmt(y)}" stroke="#ddd" stroke-width="0.5"/>`);
    parts.push(`<text x="${MARGIN.left - 6}" y="${fmt(y + 3)}" ` +
      `text-anchor="end" font-size="10">1e${d}</text>`);
  }
  parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${H - 12}" ` +
    `text-anchor="middle" font-size="12">${spec.xLabel}</text>`);
  parts.push(`<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
    `font-size="12" transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${spec.yLabel}</text>`);

  for (const ref of spec.refLines ?? []) {
    const anchorLx = Math.log10(ref.offsetThrough.x);
    const anchorLy = Math.log10(ref.offsetThrough.y);
    const lyAt = (lx: number) => anchorLy + ref.slope * (lx - anchorLx);
    parts.push(
      `<line x1="${fmt(px(x0))}" y1="${fmt(py(lyAt(x0)))}" ` +
      `x2="${fmt(px(x1))}" y2="${fmt(py(lyAt(x1)))}" stroke="${ref.color}" ` +
      `stroke-width="1" stroke-dasharray="${ref.dash ?? "5,3"}"/>`,
    );
  }

  for (const s of spec.series) {
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      if (s.x[i] <= 0 || s.y[i] <= 0) continue;
      pts.push(`${fmt(px(Math.log10(s.x[i])))},${fmt(py(Math.log10(s.y[i])))}`);
    }
    if (pts.length > 1) {
      parts.push(`<polyline points="${pts.join(" ")}" fill="none" ` +
        `stroke="${s.color}" stroke-width="${s.width ?? 1.5}"` +
        (s.dash ? ` stroke-dasharray="${s.dash}"` : "") + `/>`);
    }
    if (s.markers ?? pts.length <= 24) {
      for (const p of pts) {
        const [cx, cy] = p.split(",");
        parts.push(`<circle cx="${cx}" cy="${cy}" r="2.5" fill="${s.color}"/>`);
      }
    }
  }

  // legend and annotations
  let ly = MARGIN.top + 14;
  const legendX = MARGIN.left + 10;
  for (const s of spec.series) {
    parts.push(`<line x1="${legendX}" y1="${ly - 4}" x2="${legendX + 22}" ` +
      `y2="${ly - 4}" stroke="${s.color}" stroke-width="2"/>`);
    parts.push(`<text x="${legendX + 27}" y="${ly}" font-size="11">${s.label}</text>`);
    ly += 15;
  }
  for (const ref of spec.refLines ?? []) {
    parts.push(`<line x1="${legendX}" y1="${ly - 4}" x2="${legendX + 22}" ` +
      `y2="${ly - 4}" stroke="${ref.color}" stroke-width="1" ` +
      `stroke-dasharray="${ref.dash ?? "5,3"}"/>`);
    parts.push(`<text x="${legendX + 27}" y="${ly}" font-size="11">${ref.label}</text>`);
    ly += 15;
  }
  for (const note of spec.annotations ?? []) {
    parts.push(`<text x="${legendX}" y="${ly}" font-size="11" fill="#111">${note}</text>`);
    ly += 15;
  }

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
