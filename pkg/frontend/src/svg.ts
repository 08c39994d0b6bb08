/**
 * Minimal deterministic SVG scene builder: fixed style, no timestamps, no
 * randomness, so the same inputs always produce byte-identical files.
 */

export const WIDTH = 860;
export const HEIGHT = 520;
export const MARGIN = { top: 56, right: 32, bottom: 64, left: 84 };

export const PALETTE = [
  "#4361ee", "#e63946", "#2d6a4f", "#f77f00", "#7b2cbf",
  "#0096c7", "#bc4749", "#6c757d",
];

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function color(i: number): string {
  return PALETTE[i % PALETTE.length];
}

/** Round tick positions covering [min, max] with ~count steps. */
export function niceTicks(min: number, max: number, count = 6): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export function fmtTick(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e5 || Math.abs(v) < 1e-3)) {
    return v.toExponential(0).replace("+", "");
  }
  return Number(v.toPrecision(6)).toString();
}

export interface LinearScale {
  (v: number): number;
  min: number;
  max: number;
}

export function linearScale(
  min: number, max: number, rangeLo: number, rangeHi: number,
): LinearScale {
  const span = max - min || 1;
  const fn = ((v: number) =>
    rangeLo + ((v - min) / span) * (rangeHi - rangeLo)) as LinearScale;
  fn.min = min;
  fn.max = max;
  return fn;
}

export interface Scene {
  body: string[];
}

export function openScene(title: string): Scene {
  const body = [
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
    `<text x="${WIDTH / 2}" y="28" text-anchor="middle" ` +
      `font-size="17" font-weight="bold" fill="#1d1d1d">${esc(title)}</text>`,
  ];
  return { body };
}

export function closeScene(scene: Scene): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
    `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
    `font-family="Helvetica, Arial, sans-serif">\n` +
    scene.body.join("\n") +
    "\n</svg>\n"
  );
}

export function drawFrame(scene: Scene): void {
  scene.body.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" ` +
      `width="${WIDTH - MARGIN.left - MARGIN.right}" ` +
      `height="${HEIGHT - MARGIN.top - MARGIN.bottom}" ` +
      `fill="none" stroke="#333" stroke-width="1"/>`,
  );
}

export function drawXAxisLabel(scene: Scene, label: string): void {
  scene.body.push(
    `<text x="${(MARGIN.left + WIDTH - MARGIN.right) / 2}" ` +
      `y="${HEIGHT - 18}" text-anchor="middle" font-size="13" ` +
      `fill="#1d1d1d">${esc(label)}</text>`,
  );
}

export function drawYAxisLabel(scene: Scene, label: string): void {
  const y = (MARGIN.top + HEIGHT - MARGIN.bottom) / 2;
  scene.body.push(
    `<text x="22" y="${y}" text-anchor="middle" font-size="13" ` +
      `fill="#1d1d1d" transform="rotate(-90 22 ${y})">${esc(label)}</text>`,
  );
}

export function drawYTicks(
  scene: Scene, scale: LinearScale, format: (v: number) => string = fmtTick,
): void {
  for (const t of niceTicks(scale.min, scale.max)) {
    const y = scale(t);
    scene.body.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${WIDTH - MARGIN.right}" ` +
        `y2="${y}" stroke="#ddd" stroke-width="0.6"/>`,
      `<text x="${MARGIN.left - 8}" y="${y + 4}" text-anchor="end" ` +
        `font-size="11" fill="#444">${esc(format(t))}</text>`,
    );
  }
}

export function drawXTick(scene: Scene, x: number, label: string): void {
  scene.body.push(
    `<line x1="${x}" y1="${HEIGHT - MARGIN.bottom}" x2="${x}" ` +
      `y2="${HEIGHT - MARGIN.bottom + 5}" stroke="#333" stroke-width="1"/>`,
    `<text x="${x}" y="${HEIGHT - MARGIN.bottom + 20}" text-anchor="middle" ` +
      `font-size="11" fill="#444">${esc(label)}</text>`,
  );
}

export interface LegendEntry {
  label: string;
  color: string;
}

export function drawLegend(scene: Scene, entries: LegendEntry[]): void {
  const perRow = 4;
  entries.forEach((e, i) => {
    const x = MARGIN.left + (i % perRow) * 185;
    const y = 40 + Math.floor(i / perRow) * 14;
    scene.body.push(
      `<rect x="${x}" y="${y - 8}" width="10" height="10" fill="${e.color}"/>`,
      `<text x="${x + 14}" y="${y + 1}" font-size="11" ` +
        `fill="#1d1d1d">${esc(e.label)}</text>`,
    );
  });
}
