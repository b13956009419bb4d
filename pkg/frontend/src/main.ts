#!/usr/bin/env node
/**
 * fsi-plot: render SVG figures from slipfsi output directories.
 *
 * Usage:
 *   fsi-plot --kind energy|shifts|refinement|interface --in DIR --out FILE
 *
 * Exit codes: 0 success, 1 usage error, 2 input/schema error.
 */

import { writeFileSync } from "fs";
import { join } from "path";
import { pathToFileURL } from "url";

import { SchemaMismatch, readInterface, readLedger, readRefinement, readShifts } from "./csv.js";
import { energyFigure, interfaceFigure, refinementFigure, shiftsFigure } from "./figures.js";

const INPUT_FILES: Record<string, string> = {
  energy: "energy_ledger.csv",
  shifts: "shifts.csv",
  refinement: "refinement.csv",
  interface: "interface.csv",
};

export function renderKind(kind: string, inDir: string): string {
  const path = join(inDir, INPUT_FILES[kind]);
  switch (kind) {
    case "energy":
      return energyFigure(readLedger(path));
    case "shifts":
      return shiftsFigure(readShifts(path));
    case "refinement":
      return refinementFigure(readRefinement(path));
    case "interface":
      return interfaceFigure(readInterface(path));
    default:
      throw new Error(`unknown kind ${kind}`);
  }
}

interface Args {
  kind: string;
  inDir: string;
  out: string;
}

function parseArgs(argv: string[]): Args | null {
  let kind = "";
  let inDir = "";
  let out = "";
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--kind") kind = argv[++i] ?? "";
    else if (a === "--in") inDir = argv[++i] ?? "";
    else if (a === "--out") out = argv[++i] ?? "";
    else return null;
  }
  if (!kind || !inDir || !out) return null;
  if (!(kind in INPUT_FILES)) return null;
  return { kind, inDir, out };
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  if (args === null) {
    process.stderr.write(
      "usage: fsi-plot --kind energy|shifts|refinement|interface --in DIR --out FILE\n",
    );
    return 1;
  }
  try {
    const svg = renderKind(args.kind, args.inDir);
    writeFileSync(args.out, svg);
    return 0;
  } catch (err) {
    if (err instanceof SchemaMismatch) {
      process.stderr.write(`${err.message}\n`);
      return 2;
    }
    if (err instanceof Error && "code" in err && (err as NodeJS.ErrnoException).code === "ENOENT") {
      process.stderr.write(`input file not found: ${err.message}\n`);
      return 2;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
