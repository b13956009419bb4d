/**
 * Figure rendering against real solver outputs (test/fixtures holds CSVs
 * produced by the simulator CLI) plus synthetic edge cases.
 */

import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { dirname, join } from "path";
import { fileURLToPath } from "url";
import { describe, expect, it } from "vitest";

import {
  SchemaMismatch,
  readInterface,
  readLedger,
  readRefinement,
  readShifts,
} from "../src/csv.js";
import { powerFit } from "../src/fit.js";
import {
  energyFigure,
  interfaceFigure,
  refinementFigure,
  shiftsFigure,
} from "../src/figures.js";
import { main, renderKind } from "../src/main.js";

const FIX = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

const LEDGER_HEADER =
  "step,t,E_half,E_full,D,gcl_res,struct_res,fluid_margin,j_min,inj_margin,div_res,normal_res";

function tmpFile(name: string, content: string): string {
  const dir = mkdtempSync(join(tmpdir(), "fsiplot-"));
  const p = join(dir, name);
  writeFileSync(p, content);
  return dir;
}

describe("all four figure kinds render from real solver outputs", () => {
  for (const kind of ["energy", "shifts", "refinement", "interface"] as const) {
    it(`renders ${kind}`, () => {
      const svg = renderKind(kind, FIX);
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg).toContain("</svg>");
    });
  }
});

describe("shifts figure annotation", () => {
  it("annotates beta within 0.01 of the solver-side fit", () => {
    const expected = JSON.parse(readFileSync(join(FIX, "expected_fits.json"), "utf8"));
    const series = readShifts(join(FIX, "shifts.csv"));
    const svg = shiftsFigure(series);
    for (const s of series) {
      const fit = powerFit(s.h, s.value)!;
      expect(Math.abs(fit.beta - expected[s.field].beta)).toBeLessThan(0.01);
      expect(svg).toContain(`${s.field}: beta=${fit.beta.toFixed(4)}`);
    }
  });
});

describe("energy figure", () => {
  it("renders an empty-axes figure from a header-only ledger", () => {
    const dir = tmpFile("energy_ledger.csv", LEDGER_HEADER + "\n");
    const svg = renderKind("energy", dir);
    expect(svg.startsWith("<svg")).toBe(true);
  });

  it("flags no violations for a decreasing ledger", () => {
    const rows = [LEDGER_HEADER];
    for (let n = 0; n <= 10; n++) {
      const e = 1 - 0.05 * n;
      rows.push(`${n},${n * 0.1},${e},${e},0,0,0,0,1,0.5,0,0`);
    }
    const svg = energyFigure(readLedger(tmpFile("energy_ledger.csv", rows.join("\n") + "\n") + "/energy_ledger.csv"));
    expect(svg).not.toContain("monotonicity violations");
  });

  it("marks violations when the chain breaks", () => {
    const rows = [LEDGER_HEADER];
    const energies = [1.0, 0.9, 1.2, 0.8];
    energies.forEach((e, n) => rows.push(`${n},${n * 0.1},${e},${e},0,0,0,0,1,0.5,0,0`));
    const dir = tmpFile("energy_ledger.csv", rows.join("\n") + "\n");
    const svg = renderKind("energy", dir);
    expect(svg).toContain("monotonicity violations: 1");
  });
});

describe("schema validation", () => {
  it("rejects a ledger with a renamed column", () => {
    const header = LEDGER_HEADER.replace("E_full", "E_total");
    const dir = tmpFile("energy_ledger.csv", header + "\n");
    expect(() => renderKind("energy", dir)).toThrow(SchemaMismatch);
    try {
      renderKind("energy", dir);
    } catch (err) {
      expect((err as SchemaMismatch).column).toBe("E_full");
    }
  });

  it("rejects a shifts file with extra columns", () => {
    const dir = tmpFile("shifts.csv", "field,h,value,extra\nu,0.001,0.5,9\n");
    expect(() => renderKind("shifts", dir)).toThrow(SchemaMismatch);
  });

  it("rejects non-numeric data", () => {
    const dir = tmpFile("refinement.csv", "dt,diff_u,diff_eta\n0.001,oops,0.1\n");
    expect(() => renderKind("refinement", dir)).toThrow(SchemaMismatch);
  });
});

describe("power fit", () => {
  it("recovers an exact power law", () => {
    const h = [1e-3, 2e-3, 4e-3, 8e-3];
    const v = h.map((x) => 3 * Math.sqrt(x));
    const fit = powerFit(h, v)!;
    expect(fit.beta).toBeCloseTo(0.5, 10);
    expect(fit.c).toBeCloseTo(3.0, 10);
  });

  it("degenerates to null on all-zero values", () => {
    expect(powerFit([1e-3, 2e-3], [0, 0])).toBeNull();
  });
});

describe("determinism", () => {
  it("repeated renders are byte-identical", () => {
    const a = renderKind("energy", FIX);
    const b = renderKind("energy", FIX);
    expect(a).toBe(b);
  });
});

describe("cli", () => {
  it("writes the figure and returns 0", () => {
    const out = join(mkdtempSync(join(tmpdir(), "fsiplot-")), "fig.svg");
    expect(main(["--kind", "interface", "--in", FIX, "--out", out])).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });

  it("usage errors return 1", () => {
    expect(main(["--kind", "energy"])).toBe(1);
    expect(main(["--kind", "bogus", "--in", FIX, "--out", "/tmp/x.svg"])).toBe(1);
  });

  it("schema mismatch returns 2", () => {
    const dir = tmpFile("energy_ledger.csv", "step,t\n");
    expect(main(["--kind", "energy", "--in", dir, "--out", join(dir, "fig.svg")])).toBe(2);
  });

  it("missing input returns 2", () => {
    const dir = mkdtempSync(join(tmpdir(), "fsiplot-"));
    expect(main(["--kind", "energy", "--in", dir, "--out", join(dir, "fig.svg")])).toBe(2);
  });
});

describe("interface reader", () => {
  it("groups rows into per-step snapshots", () => {
    const snaps = readInterface(join(FIX, "interface.csv"));
    expect(snaps.length).toBeGreaterThan(2);
    const sizes = new Set(snaps.map((s) => s.x.length));
    expect(sizes.size).toBe(1);
    expect(snaps[0].t).toBe(0);
  });
});

describe("refinement reader", () => {
  it("reads the dt sweep", () => {
    const data = readRefinement(join(FIX, "refinement.csv"));
    expect(data.dt.length).toBe(data.diffU.length);
    const svg = refinementFigure(data);
    expect(svg).toContain("</svg>");
  });
});
