import { readFileSync } from "node:fs";

export interface Table {
  columns: string[];
  rows: Record<string, number>[];
}

/**
 * Read a comma-separated file with a header row and all-numeric body.
 * Every column named in `required` must be present; every cell must parse
 * as a finite number. Errors name the offending file and column.
 */
export function readCsv(path: string, required: string[]): Table {
  let raw: string;
  try {
    raw = readFileSync(path, "utf-8");
  } catch {
    throw new Error(`missing input file: ${path}`);
  }
  const lines = raw
    .split("\n")
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new Error(`${path}: no data rows`);
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new Error(`${path}: missing column '${col}' (have: ${columns.join(", ")})`);
    }
  }
  const rows: Record<string, number>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new Error(`${path}: row ${i} has ${cells.length} cells, expected ${columns.length}`);
    }
    const row: Record<string, number> = {};
    for (let j = 0; j < columns.length; j++) {
      const v = Number(cells[j]);
      if (!Number.isFinite(v)) {
        throw new Error(`${path}: column '${columns[j]}', row ${i}: non-numeric value '${cells[j]}'`);
      }
      row[columns[j]] = v;
    }
    rows.push(row);
  }
  return { columns, rows };
}

export function column(t: Table, name: string): number[] {
  return t.rows.map((r) => r[name]);
}

/** Read the run manifest and return the seed recorded in its params block. */
export function readSeed(manifestPath: string): number {
  let raw: string;
  try {
    raw = readFileSync(manifestPath, "utf-8");
  } catch {
    throw new Error(`missing manifest: ${manifestPath}`);
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    throw new Error(`${manifestPath}: not valid JSON`);
  }
  const params = (parsed as { params?: { seed?: unknown } }).params;
  const seed = params?.seed;
  if (typeof seed !== "number" || !Number.isInteger(seed)) {
    throw new Error(`${manifestPath}: params.seed missing or not an integer`);
  }
  return seed;
}
