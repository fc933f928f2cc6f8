/** Pure builders for the dashboard: meeting-curve chart, balance heatmap,
 * and headline metrics. Every displayed number is taken verbatim from the
 * server report; nothing is recomputed client-side. */

import type { ReportDoc, RoundBalance } from "./types.js";

export interface CurvePoint {
  round: number; // 1-based, as in the report
  count: number;
}

export interface CurveSeries {
  /** "0" = pairs that never met; "m" = pairs that met at least m times. */
  label: string;
  points: CurvePoint[];
}

export function meetingCurveSeries(curves: number[][]): CurveSeries[] {
  if (curves.length === 0) return [];
  const width = curves[0]!.length;
  const series: CurveSeries[] = [];
  for (let m = 0; m < width; m++) {
    series.push({
      label: String(m),
      points: curves.map((row, k) => ({ round: k + 1, count: row[m] ?? 0 })),
    });
  }
  return series;
}

export interface HeatmapCell {
  round: number; // 1-based
  table: number; // 1-based
  demographic: string;
  distance: number;
}

export function balanceCells(perRound: RoundBalance[]): HeatmapCell[] {
  const cells: HeatmapCell[] = [];
  perRound.forEach((byDemo, k) => {
    for (const demographic of Object.keys(byDemo)) {
      (byDemo[demographic] ?? []).forEach((distance, t) => {
        cells.push({ round: k + 1, table: t + 1, demographic, distance });
      });
    }
  });
  return cells;
}

export interface Headline {
  meanDistance: string;
  geometricScore: string;
  unmetPairs: string;
  excess: string;
  firstMeetings: string;
}

export function headline(report: ReportDoc): Headline {
  return {
    meanDistance: report.mean_distance.toFixed(4),
    geometricScore: report.geometric_score.toFixed(2),
    unmetPairs: `${report.unmet_pairs} of ${report.bounds.pairs_total}`,
    excess: report.excess === null ? "n/a (clustering)" : report.excess.toFixed(4),
    firstMeetings:
      report.first_meeting_fraction === null
        ? "n/a"
        : `${(report.first_meeting_fraction * 100).toFixed(1)}%`,
  };
}

const PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

export interface ChartGeometry {
  width: number;
  height: number;
  marginLeft: number;
  marginBottom: number;
  marginTop: number;
  marginRight: number;
}

const DEFAULT_GEOMETRY: ChartGeometry = {
  width: 560,
  height: 320,
  marginLeft: 48,
  marginBottom: 32,
  marginTop: 12,
  marginRight: 60,
};

function fmt(x: number): string {
  return Number.isInteger(x) ? String(x) : x.toFixed(2);
}

/** Full SVG markup for the meeting-curve chart (one polyline per series). */
export function curveChartSvg(
  curves: number[][],
  geometry: ChartGeometry = DEFAULT_GEOMETRY,
): string {
  const series = meetingCurveSeries(curves);
  const g = geometry;
  const rounds = curves.length;
  const maxCount = Math.max(1, ...curves.flat());
  const plotWidth = g.width - g.marginLeft - g.marginRight;
  const plotHeight = g.height - g.marginTop - g.marginBottom;
  const x = (round: number): number =>
    rounds === 1
      ? g.marginLeft + plotWidth / 2
      : g.marginLeft + ((round - 1) / (rounds - 1)) * plotWidth;
  const y = (count: number): number =>
    g.marginTop + plotHeight - (count / maxCount) * plotHeight;

  const parts: string[] = [];
  parts.push(
    `<svg class="curve-chart" viewBox="0 0 ${g.width} ${g.height}" role="img" ` +
      `aria-label="pairs by minimum meeting count per round">`,
  );
  parts.push(
    `<line class="axis" x1="${g.marginLeft}" y1="${g.marginTop}" ` +
      `x2="${g.marginLeft}" y2="${g.marginTop + plotHeight}"/>`,
  );
  parts.push(
    `<line class="axis" x1="${g.marginLeft}" y1="${g.marginTop + plotHeight}" ` +
      `x2="${g.marginLeft + plotWidth}" y2="${g.marginTop + plotHeight}"/>`,
  );
  for (const tick of [0, maxCount]) {
    parts.push(
      `<text class="tick" x="${g.marginLeft - 6}" y="${fmt(y(tick) + 4)}" ` +
        `text-anchor="end">${tick}</text>`,
    );
  }
  for (let round = 1; round <= rounds; round++) {
    parts.push(
      `<text class="tick" x="${fmt(x(round))}" y="${g.height - 10}" ` +
        `text-anchor="middle">${round}</text>`,
    );
  }
  series.forEach((line, idx) => {
    const colour = PALETTE[idx % PALETTE.length];
    const points = line.points
      .map((p) => `${fmt(x(p.round))},${fmt(y(p.count))}`)
      .join(" ");
    parts.push(
      `<polyline data-series="${line.label}" fill="none" stroke="${colour}" ` +
        `stroke-width="2" points="${points}"/>`,
    );
    const last = line.points[line.points.length - 1]!;
    parts.push(
      `<text class="series-label" fill="${colour}" x="${fmt(x(last.round) + 6)}" ` +
        `y="${fmt(y(last.count) + 4)}">${line.label}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n");
}

function shade(distance: number): string {
  // 0 (balanced) -> white, 1+ -> saturated red; display-only scaling
  const t = Math.min(1, Math.max(0, distance));
  const channel = Math.round(255 - t * 160);
  return `rgb(255, ${channel}, ${channel})`;
}

/** One HTML table per round: demographics as rows, tables as columns,
 * each cell showing the report's balance distance verbatim. */
export function balanceHeatmapHtml(perRound: RoundBalance[]): string {
  const parts: string[] = [];
  perRound.forEach((byDemo, k) => {
    const demographics = Object.keys(byDemo);
    const tables = demographics.length > 0 ? (byDemo[demographics[0]!] ?? []).length : 0;
    parts.push(`<figure class="heatmap" data-round="${k + 1}">`);
    parts.push(`<figcaption>round ${k + 1}</figcaption>`);
    parts.push("<table><thead><tr><th></th>");
    for (let t = 1; t <= tables; t++) {
      parts.push(`<th>table ${t}</th>`);
    }
    parts.push("</tr></thead><tbody>");
    for (const demographic of demographics) {
      parts.push(`<tr><th>${escapeHtml(demographic)}</th>`);
      (byDemo[demographic] ?? []).forEach((distance, t) => {
        parts.push(
          `<td data-round="${k + 1}" data-table="${t + 1}" ` +
            `data-demographic="${escapeHtml(demographic)}" ` +
            `style="background:${shade(distance)}">${distance.toFixed(3)}</td>`,
        );
      });
      parts.push("</tr>");
    }
    parts.push("</tbody></table></figure>");
  });
  return parts.join("\n");
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
