/** Inline SVG line chart of per-round scores against labels spent. */

import type { MetricsRow } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const SERIES: { key: "recall_cand" | "f1_test" | "f1_all"; color: string; label: string }[] = [
  { key: "recall_cand", color: "#1f77b4", label: "recall_cand" },
  { key: "f1_test", color: "#d62728", label: "F1 (test)" },
  { key: "f1_all", color: "#2ca02c", label: "F1 (all pairs)" },
];

function seriesValue(row: MetricsRow, key: "recall_cand" | "f1_test" | "f1_all"): number {
  if (key === "recall_cand") return row.recall_cand;
  if (key === "f1_test") return row.test.f1;
  return row.all.f1;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) {
    el.setAttribute(name, value);
  }
  return el;
}

/** Build a chart whose x positions and tick labels are the cumulative
 * labeled counts of `rows`, one tick per round. */
export function metricsChart(rows: MetricsRow[], width = 560, height = 220): SVGSVGElement {
  const pad = { left: 44, right: 12, top: 12, bottom: 34 };
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    class: "metrics-chart",
    role: "img",
  });
  if (rows.length === 0) {
    return svg;
  }

  const counts = rows.map(r => r.labeled);
  const lo = counts[0]!;
  const hi = counts[counts.length - 1]!;
  const spanX = Math.max(1, hi - lo);
  const plotW = width - pad.left - pad.right;
  const plotH = height - pad.top - pad.bottom;
  const x = (labeled: number) => pad.left + ((labeled - lo) / spanX) * plotW;
  const y = (value: number) => pad.top + (1 - Math.min(1, Math.max(0, value))) * plotH;

  svg.appendChild(
    svgEl("line", {
      x1: String(pad.left),
      y1: String(pad.top + plotH),
      x2: String(pad.left + plotW),
      y2: String(pad.top + plotH),
      class: "axis",
    }),
  );
  for (const value of [0, 0.5, 1]) {
    const tick = svgEl("text", {
      x: String(pad.left - 6),
      y: String(y(value) + 4),
      "text-anchor": "end",
      class: "tick",
    });
    tick.textContent = value.toFixed(1);
    svg.appendChild(tick);
  }
  for (const row of rows) {
    const tick = svgEl("text", {
      x: String(x(row.labeled)),
      y: String(pad.top + plotH + 16),
      "text-anchor": "middle",
      class: "tick x-tick",
    });
    tick.textContent = String(row.labeled);
    svg.appendChild(tick);
  }
  const caption = svgEl("text", {
    x: String(pad.left + plotW / 2),
    y: String(height - 4),
    "text-anchor": "middle",
    class: "axis-label",
  });
  caption.textContent = "labels spent";
  svg.appendChild(caption);

  for (const series of SERIES) {
    const points = rows
      .map(row => `${x(row.labeled)},${y(seriesValue(row, series.key))}`)
      .join(" ");
    svg.appendChild(
      svgEl("polyline", {
        points,
        fill: "none",
        stroke: series.color,
        "stroke-width": "2",
        "data-series": series.key,
      }),
    );
    for (const row of rows) {
      svg.appendChild(
        svgEl("circle", {
          cx: String(x(row.labeled)),
          cy: String(y(seriesValue(row, series.key))),
          r: "3",
          fill: series.color,
        }),
      );
    }
  }
  return svg;
}

/** Legend entries matching the chart's series colors. */
export function chartLegend(): HTMLElement {
  const legend = document.createElement("div");
  legend.className = "chart-legend";
  for (const series of SERIES) {
    const entry = document.createElement("span");
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = series.color;
    entry.appendChild(swatch);
    entry.appendChild(document.createTextNode(series.label));
    legend.appendChild(entry);
  }
  return legend;
}
