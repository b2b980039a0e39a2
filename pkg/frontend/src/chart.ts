/** Inline SVG line chart for the per-quarter series. */

import type { Series } from "./state.js";

const WIDTH = 640;
const HEIGHT = 260;
const PAD = 36;

function scaleX(quarter: number, horizon: number): number {
  if (horizon <= 1) return PAD;
  return PAD + ((quarter - 1) / (horizon - 1)) * (WIDTH - 2 * PAD);
}

function polyline(values: number[], quarters: number[], horizon: number, yMax: number,
                  stroke: string, dash = ""): string {
  if (values.length === 0) return "";
  const points = values
    .map((v, i) => {
      const x = scaleX(quarters[i], horizon);
      const y = HEIGHT - PAD - (v / yMax) * (HEIGHT - 2 * PAD);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<polyline fill="none" stroke="${stroke}" stroke-width="2"${dashAttr} points="${points}" />`;
}

/**
 * Supply (solid) and demand (dashed) lines, a dotted reference at the patient
 * demand level, and an optional vertical marker at the recorded resolution
 * quarter when a ground-truth pairing is attached.
 */
export function chartSvg(series: Series, horizon: number, patientDemand: number,
                         gtResolution: number | null): string {
  const all = [...series.demand, ...series.supply, patientDemand, 0.1];
  const yMax = Math.max(...all) * 1.15;
  const parts: string[] = [];
  parts.push(`<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="supply and demand by quarter">`);
  parts.push(`<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="#ffffff" />`);

  // axes
  parts.push(`<line x1="${PAD}" y1="${HEIGHT - PAD}" x2="${WIDTH - PAD}" y2="${HEIGHT - PAD}" stroke="#444" />`);
  parts.push(`<line x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${HEIGHT - PAD}" stroke="#444" />`);
  for (let q = 1; q <= horizon; q += 1) {
    const x = scaleX(q, horizon);
    parts.push(`<text x="${x.toFixed(1)}" y="${HEIGHT - PAD + 16}" font-size="11" text-anchor="middle">${q}</text>`);
  }

  // patient-demand reference line
  const refY = HEIGHT - PAD - (patientDemand / yMax) * (HEIGHT - 2 * PAD);
  parts.push(`<line x1="${PAD}" y1="${refY.toFixed(1)}" x2="${WIDTH - PAD}" y2="${refY.toFixed(1)}" stroke="#999" stroke-dasharray="2,4" />`);
  parts.push(`<text x="${WIDTH - PAD}" y="${(refY - 5).toFixed(1)}" font-size="10" text-anchor="end" fill="#666">patient demand</text>`);

  if (gtResolution !== null && gtResolution >= 1 && gtResolution <= horizon) {
    const x = scaleX(gtResolution, horizon);
    parts.push(`<line x1="${x.toFixed(1)}" y1="${PAD}" x2="${x.toFixed(1)}" y2="${HEIGHT - PAD}" stroke="#8a2be2" stroke-dasharray="6,3,1,3" />`);
    parts.push(`<text x="${(x + 4).toFixed(1)}" y="${PAD + 10}" font-size="10" fill="#8a2be2">recorded resolution</text>`);
  }

  parts.push(polyline(series.supply, series.quarters, horizon, yMax, "#1f77b4"));
  parts.push(polyline(series.demand, series.quarters, horizon, yMax, "#d62728", "6,4"));
  parts.push(`</svg>`);
  return parts.join("");
}
