/**
 * The four figure kinds rendered from the solver's CSV outputs.
 *
 *   energy     -- decay chain E_half / E_full with the monotonicity
 *                 envelope and violation markers, plus cumulative D
 *   shifts     -- time-shift norms on log-log axes with fitted power
 *                 laws, the exponent of each series annotated
 *   refinement -- Cauchy differences of the dt sweep on log-log axes
 *   interface  -- deformed interface snapshots reconstructed from the
 *                 displacement dump
 */

import {
  LedgerData,
  RefinementData,
  ShiftSeries,
  InterfaceSnapshot,
} from "./csv.js";
import { powerFit } from "./fit.js";
import { Figure, color } from "./svg.js";

function extent(values: number[], fallback: [number, number]): [number, number] {
  if (values.length === 0) return fallback;
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

function positiveExtent(values: number[], fallback: [number, number]): [number, number] {
  const pos = values.filter((v) => v > 0);
  return pos.length ? extent(pos, fallback) : fallback;
}

export function energyFigure(ledger: LedgerData): string {
  const fig = new Figure();
  fig.title("Discrete energy decay chain");
  const n = ledger.t.length;
  const cumD: number[] = [];
  let acc = 0;
  for (let i = 0; i < n; i++) {
    acc += ledger.d[i];
    cumD.push(acc);
  }
  const [tLo, tHi] = extent(ledger.t, [0, 1]);
  const all = [...ledger.eHalf, ...ledger.eFull, ...cumD];
  const [eLo, eHi] = extent(all, [0, 1]);
  const x = fig.xAxis("linear", tLo, tHi);
  const y = fig.yAxis("linear", Math.min(0, eLo), eHi === eLo ? eLo + 1 : eHi);
  fig.axes(x, y, "t", "energy");

  if (n > 0) {
    // monotonicity envelope: the running minimum every later energy must respect
    const envelope: number[] = [];
    let run = Infinity;
    for (const e of ledger.eFull) {
      run = Math.min(run, e);
      envelope.push(run);
    }
    fig.polyline(x, y, ledger.t, envelope, "#999", { width: 1, dash: "6 4" });
    fig.polyline(x, y, ledger.t, ledger.eHalf, color(0));
    fig.polyline(x, y, ledger.t, ledger.eFull, color(1));
    fig.polyline(x, y, ledger.t, cumD, color(2));

    const tol = 1e-10 * Math.max(1, ledger.eFull[0]);
    const badT: number[] = [];
    const badE: number[] = [];
    for (let i = 1; i < n; i++) {
      if (ledger.eFull[i] > ledger.eHalf[i] + tol || ledger.eHalf[i] > ledger.eFull[i - 1] + tol) {
        badT.push(ledger.t[i]);
        badE.push(ledger.eFull[i]);
      }
    }
    fig.markers(x, y, badT, badE, "#d62728", 5, "cross");
    if (badT.length > 0) {
      fig.note(`monotonicity violations: ${badT.length}`);
    }
  }
  fig.legend([
    { label: "E_half", stroke: color(0) },
    { label: "E_full", stroke: color(1) },
    { label: "cumulative D", stroke: color(2) },
    { label: "envelope", stroke: "#999" },
  ]);
  return fig.render();
}

export function shiftsFigure(series: ShiftSeries[]): string {
  const fig = new Figure();
  fig.title("Time-shift norms and fitted rates");
  const allH = series.flatMap((s) => s.h);
  const allV = series.flatMap((s) => s.value);
  const [hLo, hHi] = positiveExtent(allH, [1e-3, 1e-1]);
  const [vLo, vHi] = positiveExtent(allV, [1e-6, 1]);
  const x = fig.xAxis("log", hLo, hHi);
  const y = fig.yAxis("log", vLo, vHi);
  fig.axes(x, y, "shift h", "|T_h f - f|");

  const legend: Array<{ label: string; stroke: string }> = [];
  series.forEach((s, i) => {
    const keep = s.value.map((v, k) => v > 0);
    const hs = s.h.filter((_, k) => keep[k]);
    const vs = s.value.filter((_, k) => keep[k]);
    fig.markers(x, y, hs, vs, color(i));
    const fit = powerFit(s.h, s.value);
    if (fit) {
      const line = hs.map((h) => fit.c * Math.pow(h, fit.beta));
      fig.polyline(x, y, hs, line, color(i), { width: 1, dash: "4 3" });
      fig.note(`${s.field}: beta=${fit.beta.toFixed(4)}`, legend.length * 16);
    } else {
      fig.note(`${s.field}: degenerate`, legend.length * 16);
    }
    legend.push({ label: s.field, stroke: color(i) });
  });
  fig.legend(legend);
  return fig.render();
}

export function refinementFigure(data: RefinementData): string {
  const fig = new Figure();
  fig.title("Cauchy differences under dt refinement");
  const [dLo, dHi] = positiveExtent(data.dt, [1e-4, 1e-2]);
  const [vLo, vHi] = positiveExtent([...data.diffU, ...data.diffEta], [1e-8, 1]);
  const x = fig.xAxis("log", dLo, dHi);
  const y = fig.yAxis("log", vLo, vHi);
  fig.axes(x, y, "dt", "difference to next refinement");
  const pairs: Array<[string, number[]]> = [
    ["|u_dt - u_dt/2|", data.diffU],
    ["|eta_dt - eta_dt/2|", data.diffEta],
  ];
  pairs.forEach(([label, vals], i) => {
    const keep = vals.map((v) => v > 0);
    const xs = data.dt.filter((_, k) => keep[k]);
    const ys = vals.filter((v) => v > 0);
    fig.polyline(x, y, xs, ys, color(i));
    fig.markers(x, y, xs, ys, color(i));
  });
  fig.legend(pairs.map(([label], i) => ({ label, stroke: color(i) })));
  return fig.render();
}

export function interfaceFigure(snaps: InterfaceSnapshot[]): string {
  const fig = new Figure();
  fig.title("Interface shape snapshots");
  const chosen = pickSnapshots(snaps, 5);
  const allX = chosen.flatMap((s) => s.x);
  const allY = chosen.flatMap((s) => s.y);
  const [xLo, xHi] = extent(allX, [0, 1]);
  let [yLo, yHi] = extent(allY, [0, 1.2]);
  const pad = Math.max(0.05 * (yHi - yLo), 1e-3);
  yLo -= pad;
  yHi += pad;
  const x = fig.xAxis("linear", xLo, xHi);
  const y = fig.yAxis("linear", yLo, yHi);
  fig.axes(x, y, "x", "y");
  chosen.forEach((s, i) => {
    fig.polyline(x, y, s.x, s.y, color(i));
  });
  fig.legend(chosen.map((s, i) => ({ label: `t=${s.t.toPrecision(3)}`, stroke: color(i) })));
  return fig.render();
}

function pickSnapshots(snaps: InterfaceSnapshot[], count: number): InterfaceSnapshot[] {
  if (snaps.length <= count) return snaps;
  const out: InterfaceSnapshot[] = [];
  for (let i = 0; i < count; i++) {
    const k = Math.round((i * (snaps.length - 1)) / (count - 1));
    out.push(snaps[k]);
  }
  return out;
}
