/**
 * CSV ingestion for the figure renderers.
 *
 * Cells are kept as verbatim strings: the renderers embed them unchanged in
 * the SVG output and convert to numbers only to position marks, so a plotted
 * value is always byte-equal to its source cell.
 */

import { readFileSync } from "fs";
import Papa from "papaparse";

export interface Table {
  header: string[];
  rows: Record<string, string>[];
}

export class MissingColumnError extends Error {
  constructor(public readonly column: string, public readonly path: string) {
    super(`input ${path} is missing required column '${column}'`);
  }
}

export class EmptyInputError extends Error {
  constructor(public readonly path: string) {
    super(`input ${path} contains no data rows`);
  }
}

export function readCsv(path: string): Table {
  const text = readFileSync(path, "utf-8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new Error(`failed to parse ${path}: ${e.message} (row ${e.row})`);
  }
  const header = (parsed.meta.fields ?? []).map((f) => f.trim());
  return { header, rows: parsed.data };
}

/** Verify the documented header contract before touching any data. */
export function requireColumns(table: Table, columns: string[], path: string): void {
  for (const c of columns) {
    if (!table.header.includes(c)) throw new MissingColumnError(c, path);
  }
}

/** Keep rows whose cells equal the filter values exactly (string match). */
export function filterRows(
  rows: Record<string, string>[],
  filter: Record<string, string | string[]> | undefined,
): Record<string, string>[] {
  if (!filter) return rows;
  return rows.filter((row) =>
    Object.entries(filter).every(([col, want]) => {
      const cell = row[col];
      return Array.isArray(want) ? want.includes(cell) : cell === want;
    }),
  );
}

/** Distinct cell values of a column, in first-seen order. */
export function distinct(rows: Record<string, string>[], column: string): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    const v = row[column];
    if (!seen.includes(v)) seen.push(v);
  }
  return seen;
}
