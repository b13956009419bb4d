/**
 * Strict CSV ingestion for the simulator's output files.
 *
 * Every reader validates the header against the exact column list the
 * solver emits; any deviation raises SchemaMismatch naming the offending
 * column so a stale or foreign file is rejected up front.
 */

import { readFileSync } from "fs";

export class SchemaMismatch extends Error {
  readonly column: string;

  constructor(column: string, detail: string) {
    super(`schema mismatch on column ${JSON.stringify(column)}: ${detail}`);
    this.name = "SchemaMismatch";
    this.column = column;
  }
}

export const LEDGER_COLUMNS = [
  "step", "t", "E_half", "E_full", "D", "gcl_res", "struct_res",
  "fluid_margin", "j_min", "inj_margin", "div_res", "normal_res",
] as const;

export const SHIFTS_COLUMNS = ["field", "h", "value"] as const;
export const REFINEMENT_COLUMNS = ["dt", "diff_u", "diff_eta"] as const;
export const INTERFACE_COLUMNS = ["step", "t", "z", "phi_x", "phi_y"] as const;

export interface Table {
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaMismatch("<header>", "file is empty");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  for (const row of rows) {
    if (row.length !== columns.length) {
      throw new SchemaMismatch(columns[Math.min(row.length, columns.length) - 1] ?? "<row>",
        `row has ${row.length} fields, header has ${columns.length}`);
    }
  }
  return { columns, rows };
}

function checkHeader(table: Table, expected: readonly string[]): void {
  for (let i = 0; i < Math.max(table.columns.length, expected.length); i++) {
    if (table.columns[i] !== expected[i]) {
      throw new SchemaMismatch(expected[i] ?? table.columns[i],
        `expected header ${expected.join(",")}, found ${table.columns.join(",")}`);
    }
  }
}

function numeric(table: Table, column: string): number[] {
  const k = table.columns.indexOf(column);
  return table.rows.map((r, i) => {
    const v = Number(r[k]);
    if (!Number.isFinite(v)) {
      throw new SchemaMismatch(column, `non-numeric value ${JSON.stringify(r[k])} in row ${i + 1}`);
    }
    return v;
  });
}

export interface LedgerData {
  step: number[];
  t: number[];
  eHalf: number[];
  eFull: number[];
  d: number[];
}

export function readLedger(path: string): LedgerData {
  const table = parseCsv(readFileSync(path, "utf8"));
  checkHeader(table, LEDGER_COLUMNS);
  return {
    step: numeric(table, "step"),
    t: numeric(table, "t"),
    eHalf: numeric(table, "E_half"),
    eFull: numeric(table, "E_full"),
    d: numeric(table, "D"),
  };
}

export interface ShiftSeries {
  field: string;
  h: number[];
  value: number[];
}

export function readShifts(path: string): ShiftSeries[] {
  const table = parseCsv(readFileSync(path, "utf8"));
  checkHeader(table, SHIFTS_COLUMNS);
  const fieldCol = table.rows.map((r) => r[0]);
  const h = numeric(table, "h");
  const value = numeric(table, "value");
  const order: string[] = [];
  const series = new Map<string, ShiftSeries>();
  fieldCol.forEach((f, i) => {
    if (!series.has(f)) {
      series.set(f, { field: f, h: [], value: [] });
      order.push(f);
    }
    const s = series.get(f)!;
    s.h.push(h[i]);
    s.value.push(value[i]);
  });
  return order.map((f) => series.get(f)!);
}

export interface RefinementData {
  dt: number[];
  diffU: number[];
  diffEta: number[];
}

export function readRefinement(path: string): RefinementData {
  const table = parseCsv(readFileSync(path, "utf8"));
  checkHeader(table, REFINEMENT_COLUMNS);
  return {
    dt: numeric(table, "dt"),
    diffU: numeric(table, "diff_u"),
    diffEta: numeric(table, "diff_eta"),
  };
}

export interface InterfaceSnapshot {
  step: number;
  t: number;
  x: number[];
  y: number[];
}

export function readInterface(path: string): InterfaceSnapshot[] {
  const table = parseCsv(readFileSync(path, "utf8"));
  checkHeader(table, INTERFACE_COLUMNS);
  const step = numeric(table, "step");
  const t = numeric(table, "t");
  const x = numeric(table, "phi_x");
  const y = numeric(table, "phi_y");
  const snaps: InterfaceSnapshot[] = [];
  let current: InterfaceSnapshot | null = null;
  for (let i = 0; i < step.length; i++) {
    if (current === null || current.step !== step[i]) {
      current = { step: step[i], t: t[i], x: [], y: [] };
      snaps.push(current);
    }
    current.x.push(x[i]);
    current.y.push(y[i]);
  }
  return snaps;
}
