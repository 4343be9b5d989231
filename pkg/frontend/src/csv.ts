/** Reader for the simulator's CSV logs (header row, float cells, NaN allowed). */

import { readFileSync } from "node:fs";

export interface Table {
  columns: string[];
  rows: number[][];
}

export class SchemaError extends Error {}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((ln) => ln.trim().length > 0);
  if (lines.length < 2) {
    throw new SchemaError("CSV needs a header row and at least one data row");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows = lines.slice(1).map((ln, i) => {
    const cells = ln.split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(`row ${i + 1} has ${cells.length} cells, expected ${columns.length}`);
    }
    return cells.map(Number);
  });
  return { columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(
      `missing column '${name}' (have: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((r) => r[idx]);
}
