/** Figure specification: what to read, what to draw, where to write it. */

import { readFileSync } from "fs";
import { z } from "zod";

export const FIGURE_KINDS = [
  "rate-curves",
  "power-bars",
  "ber-bars",
  "pulse-timeline",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

const figureSpecSchema = z.object({
  kind: z.enum(FIGURE_KINDS),
  input: z.string().min(1),
  output: z.string().min(1),
  title: z.string().optional(),
  x_label: z.string().optional(),
  y_label: z.string().optional(),
  // exact string match on cells, e.g. {"R_L": ["16", "40"]}
  filter: z.record(z.union([z.string(), z.array(z.string())])).optional(),
});

export type FigureSpec = z.infer<typeof figureSpecSchema>;

export function parseFigureSpec(data: unknown): FigureSpec {
  const result = figureSpecSchema.safeParse(data);
  if (!result.success) {
    const issue = result.error.issues[0];
    throw new Error(
      `invalid figure spec: ${issue.path.join(".") || "<root>"}: ${issue.message}`,
    );
  }
  return result.data;
}

export function loadFigureSpec(path: string): FigureSpec {
  let raw: string;
  try {
    raw = readFileSync(path, "utf-8");
  } catch {
    throw new Error(`figure spec not found: ${path}`);
  }
  return parseFigureSpec(JSON.parse(raw));
}

/** Documented CSV header contract per figure kind. */
export const REQUIRED_COLUMNS: Record<FigureKind, string[]> = {
  "rate-curves": ["scheme", "M", "R_L", "bit_rate_bps"],
  "power-bars": ["scheme", "M", "power_efficiency_pct"],
  "ber-bars": ["scheme", "angle_deg", "ber"],
  "pulse-timeline": ["time_s", "emitted", "pre_level"],
};
