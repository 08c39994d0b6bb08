/**
 * The four figure kinds rendered from optosim CSV outputs.
 *
 * Every mark carries data-* attributes holding the verbatim source cells, so
 * figure fidelity (plotted value == CSV cell) is checkable on the artifact
 * itself; numeric parsing is used only to position marks.
 */

import { writeFileSync } from "fs";
import { dirname } from "path";
import { mkdirSync } from "fs";

import {
  distinct, EmptyInputError, filterRows, readCsv, requireColumns, Table,
} from "./csv.js";
import { FigureSpec, REQUIRED_COLUMNS } from "./spec.js";
import {
  closeScene, color, drawFrame, drawLegend, drawXAxisLabel, drawXTick,
  drawYAxisLabel, drawYTicks, esc, fmtTick, HEIGHT, linearScale, MARGIN,
  openScene, Scene, WIDTH,
} from "./svg.js";

type Row = Record<string, string>;

const PLOT_LEFT = MARGIN.left;
const PLOT_RIGHT = WIDTH - MARGIN.right;
const PLOT_TOP = MARGIN.top;
const PLOT_BOTTOM = HEIGHT - MARGIN.bottom;

function mark(
  scene: Scene, shape: string, data: Record<string, string>,
): void {
  const attrs = Object.entries(data)
    .map(([k, v]) => `data-${k}="${esc(v)}"`)
    .join(" ");
  scene.body.push(shape.replace("/>", ` ${attrs}/>`));
}

function numbers(rows: Row[], column: string): number[] {
  return rows.map((r) => {
    const v = Number(r[column]);
    if (!Number.isFinite(v)) {
      throw new Error(`non-numeric cell '${r[column]}' in column '${column}'`);
    }
    return v;
  });
}

// ---------------------------------------------------------------------------
// rate-curves: bit rate vs M, one line per (scheme, R_L) series
// ---------------------------------------------------------------------------

function renderRateCurves(spec: FigureSpec, rows: Row[]): string {
  const scene = openScene(spec.title ?? "Bit rate by modulation scheme");
  const ms = numbers(rows, "M");
  const rates = numbers(rows, "bit_rate_bps");
  const x = linearScale(Math.min(...ms), Math.max(...ms), PLOT_LEFT + 20,
                        PLOT_RIGHT - 20);
  const y = linearScale(0, Math.max(...rates), PLOT_BOTTOM, PLOT_TOP + 10);
  drawYTicks(scene, y);
  drawFrame(scene);
  for (const m of distinct(rows, "M")) {
    drawXTick(scene, x(Number(m)), m);
  }

  const seriesKeys = distinct(
    rows.map((r) => ({ key: `${r.scheme} @ ${r.R_L} Hz` }) as Row), "key");
  const legend: { label: string; color: string }[] = [];
  seriesKeys.forEach((key, i) => {
    const series = rows.filter((r) => `${r.scheme} @ ${r.R_L} Hz` === key);
    series.sort((a, b) => Number(a.M) - Number(b.M));
    const pts = series.map((r) => `${x(Number(r.M))},${y(Number(r.bit_rate_bps))}`);
    scene.body.push(
      `<polyline points="${pts.join(" ")}" fill="none" ` +
        `stroke="${color(i)}" stroke-width="1.6"/>`,
    );
    for (const r of series) {
      mark(scene,
           `<circle cx="${x(Number(r.M))}" cy="${y(Number(r.bit_rate_bps))}" ` +
             `r="3.2" fill="${color(i)}"/>`,
           { series: key, x: r.M, y: r.bit_rate_bps });
    }
    legend.push({ label: key, color: color(i) });
  });
  drawLegend(scene, legend);
  drawXAxisLabel(scene, spec.x_label ?? "source bits per symbol M");
  drawYAxisLabel(scene, spec.y_label ?? "bit rate (bits/s)");
  return closeScene(scene);
}

// ---------------------------------------------------------------------------
// power-bars: efficiency vs M, one bar per scheme in each M group
// ---------------------------------------------------------------------------

function renderPowerBars(spec: FigureSpec, rows: Row[]): string {
  // efficiency is rate-independent: keep the first row per (scheme, M)
  const seen = new Set<string>();
  const uniq = rows.filter((r) => {
    const key = `${r.scheme}\u0000${r.M}`;
    if (seen.has(key)) return false;
    seen.add(key);
    return true;
  });
  const scene = openScene(spec.title ?? "Power efficiency relative to OOK");
  const values = numbers(uniq, "power_efficiency_pct");
  const y = linearScale(0, Math.max(...values), PLOT_BOTTOM, PLOT_TOP + 10);
  drawYTicks(scene, y);
  drawFrame(scene);

  const groups = distinct(uniq, "M").sort((a, b) => Number(a) - Number(b));
  const schemes = distinct(uniq, "scheme");
  const groupWidth = (PLOT_RIGHT - PLOT_LEFT) / groups.length;
  const barWidth = (groupWidth * 0.8) / schemes.length;
  groups.forEach((m, gi) => {
    const gx = PLOT_LEFT + gi * groupWidth;
    drawXTick(scene, gx + groupWidth / 2, m);
    schemes.forEach((scheme, si) => {
      const row = uniq.find((r) => r.M === m && r.scheme === scheme);
      if (!row) return;
      const v = Number(row.power_efficiency_pct);
      const bx = gx + groupWidth * 0.1 + si * barWidth;
      mark(scene,
           `<rect x="${bx}" y="${y(v)}" width="${barWidth * 0.92}" ` +
             `height="${PLOT_BOTTOM - y(v)}" fill="${color(si)}"/>`,
           { series: scheme, x: row.M, y: row.power_efficiency_pct });
    });
  });
  drawLegend(scene, schemes.map((s, i) => ({ label: s, color: color(i) })));
  drawXAxisLabel(scene, spec.x_label ?? "source bits per symbol M");
  drawYAxisLabel(scene, spec.y_label ?? "power efficiency vs OOK (%)");
  return closeScene(scene);
}

// ---------------------------------------------------------------------------
// ber-bars: BER on a log axis, grouped by receiver angle, bar per row
// ---------------------------------------------------------------------------

function renderBerBars(spec: FigureSpec, rows: Row[]): string {
  const scene = openScene(spec.title ?? "Bit error rate by receiver angle");
  const bers = numbers(rows, "ber");
  const positive = bers.filter((b) => b > 0);
  const floor = positive.length
    ? Math.pow(10, Math.floor(Math.log10(Math.min(...positive))) - 1)
    : 1e-6;
  const top = Math.max(...bers, floor * 10);
  const logY = (v: number) => {
    const clamped = Math.max(v, floor);
    const t = (Math.log10(clamped) - Math.log10(floor)) /
      (Math.log10(top) - Math.log10(floor) || 1);
    return PLOT_BOTTOM - t * (PLOT_BOTTOM - PLOT_TOP - 10);
  };
  for (let d = Math.log10(floor); d <= Math.log10(top) + 1e-9; d += 1) {
    const v = Math.pow(10, d);
    const yy = logY(v);
    scene.body.push(
      `<line x1="${PLOT_LEFT}" y1="${yy}" x2="${PLOT_RIGHT}" y2="${yy}" ` +
        `stroke="#ddd" stroke-width="0.6"/>`,
      `<text x="${PLOT_LEFT - 8}" y="${yy + 4}" text-anchor="end" ` +
        `font-size="11" fill="#444">${esc(v.toExponential(0).replace("+", ""))}</text>`,
    );
  }
  drawFrame(scene);

  const groups = distinct(rows, "angle_deg");
  const schemes = distinct(rows, "scheme");
  const groupWidth = (PLOT_RIGHT - PLOT_LEFT) / groups.length;
  groups.forEach((angle, gi) => {
    const gx = PLOT_LEFT + gi * groupWidth;
    drawXTick(scene, gx + groupWidth / 2, `${angle}`);
    const members = rows.filter((r) => r.angle_deg === angle);
    const barWidth = (groupWidth * 0.8) / members.length;
    members.forEach((row, mi) => {
      const v = Number(row.ber);
      const bx = gx + groupWidth * 0.1 + mi * barWidth;
      const yy = logY(v);
      mark(scene,
           `<rect x="${bx}" y="${yy}" width="${barWidth * 0.9}" ` +
             `height="${Math.max(PLOT_BOTTOM - yy, 1)}" ` +
             `fill="${color(schemes.indexOf(row.scheme))}" ` +
             `${v <= floor ? 'opacity="0.35"' : ""}/>`,
           { series: row.scheme, x: row.angle_deg, y: row.ber });
    });
  });
  drawLegend(scene, schemes.map((s, i) => ({ label: s, color: color(i) })));
  drawXAxisLabel(scene, spec.x_label ?? "receiver angle (deg)");
  drawYAxisLabel(scene, spec.y_label ?? "bit error rate");
  return closeScene(scene);
}

// ---------------------------------------------------------------------------
// pulse-timeline: emitted pulses as filled marks, suppressed as hollow ones
// ---------------------------------------------------------------------------

function renderPulseTimeline(spec: FigureSpec, rows: Row[]): string {
  const scene = openScene(spec.title ?? "Pulse train through the vapor cloud");
  const times = numbers(rows, "time_s");
  const levels = numbers(rows, "pre_level");
  const x = linearScale(Math.min(...times), Math.max(...times),
                        PLOT_LEFT + 16, PLOT_RIGHT - 16);
  const pulseY = PLOT_TOP + (PLOT_BOTTOM - PLOT_TOP) * 0.28;
  const levelScale = linearScale(0, Math.max(...levels, 1),
                                 PLOT_BOTTOM - 10,
                                 PLOT_TOP + (PLOT_BOTTOM - PLOT_TOP) * 0.5);
  drawFrame(scene);
  for (const t of [times[0], times[Math.floor(times.length / 2)],
                   times[times.length - 1]]) {
    drawXTick(scene, x(t), fmtTick(t));
  }

  const levelPts = rows.map(
    (r) => `${x(Number(r.time_s))},${levelScale(Number(r.pre_level))}`);
  scene.body.push(
    `<polyline points="${levelPts.join(" ")}" fill="none" stroke="#999" ` +
      `stroke-width="1" stroke-dasharray="3,2"/>`,
  );
  scene.body.push(
    `<text x="${PLOT_RIGHT - 4}" y="${levelScale(0) + 14}" text-anchor="end" ` +
      `font-size="11" fill="#777">pre-pulse cloud level</text>`,
  );
  for (const row of rows) {
    const cx = x(Number(row.time_s));
    const emitted = row.emitted === "1";
    const shape = emitted
      ? `<circle cx="${cx}" cy="${pulseY}" r="4.5" fill="#4361ee"/>`
      : `<circle cx="${cx}" cy="${pulseY}" r="4.5" fill="none" ` +
        `stroke="#e63946" stroke-width="1.6" stroke-dasharray="2,1.5"/>`;
    mark(scene, shape,
         { x: row.time_s, emitted: row.emitted, level: row.pre_level });
    scene.body.push(
      `<line x1="${cx}" y1="${pulseY + 6}" x2="${cx}" y2="${levelScale(0)}" ` +
        `stroke="#ccc" stroke-width="0.5"/>`,
    );
  }
  drawLegend(scene, [
    { label: "acoustic signal generated", color: "#4361ee" },
    { label: "suppressed by vapor cloud", color: "#e63946" },
  ]);
  drawXAxisLabel(scene, spec.x_label ?? "time (s)");
  drawYAxisLabel(scene, spec.y_label ?? "pulse outcome / cloud level");
  return closeScene(scene);
}

// ---------------------------------------------------------------------------

const RENDERERS: Record<string, (spec: FigureSpec, rows: Row[]) => string> = {
  "rate-curves": renderRateCurves,
  "power-bars": renderPowerBars,
  "ber-bars": renderBerBars,
  "pulse-timeline": renderPulseTimeline,
};

/** Render a figure spec end to end and return the SVG text. */
export function renderFigure(spec: FigureSpec): string {
  const table: Table = readCsv(spec.input);
  requireColumns(table, REQUIRED_COLUMNS[spec.kind], spec.input);
  const rows = filterRows(table.rows, spec.filter);
  if (rows.length === 0) throw new EmptyInputError(spec.input);
  return RENDERERS[spec.kind](spec, rows);
}

/** Render and write the SVG to the spec's output path. */
export function renderToFile(spec: FigureSpec): string {
  const svg = renderFigure(spec);
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, svg, "utf-8");
  return spec.output;
}
