/**
 * Minimal deterministic SVG plotting surface.
 *
 * Hand-rolled on purpose: no canvas, no dependencies, byte-stable output
 * for identical inputs.  Axes are linear or log10; numbers are formatted
 * with fixed precision so repeated renders are identical.
 */

export type Scale = "linear" | "log";

export interface Margins {
  left: number;
  right: number;
  top: number;
  bottom: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export function color(i: number): string {
  return PALETTE[i % PALETTE.length];
}

function fmt(v: number): string {
  return v.toFixed(2);
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Number(v.toPrecision(4)));
}

export class Axis {
  readonly scale: Scale;
  readonly lo: number;
  readonly hi: number;
  readonly pixLo: number;
  readonly pixHi: number;

  constructor(scale: Scale, lo: number, hi: number, pixLo: number, pixHi: number) {
    if (scale === "log" && (lo <= 0 || hi <= 0)) {
      throw new Error("log axis requires positive bounds");
    }
    if (lo === hi) {
      const pad = lo === 0 ? 1 : Math.abs(lo) * 0.5;
      lo -= pad;
      hi += pad;
    }
    this.scale = scale;
    this.lo = lo;
    this.hi = hi;
    this.pixLo = pixLo;
    this.pixHi = pixHi;
  }

  pos(v: number): number {
    const [a, b] = this.scale === "log"
      ? [Math.log10(this.lo), Math.log10(this.hi)]
      : [this.lo, this.hi];
    const t = ((this.scale === "log" ? Math.log10(v) : v) - a) / (b - a);
    return this.pixLo + t * (this.pixHi - this.pixLo);
  }

  ticks(n = 5): number[] {
    if (this.scale === "log") {
      const lo = Math.ceil(Math.log10(this.lo) - 1e-9);
      const hi = Math.floor(Math.log10(this.hi) + 1e-9);
      const out: number[] = [];
      for (let e = lo; e <= hi; e++) out.push(Math.pow(10, e));
      return out.length >= 2 ? out : [this.lo, this.hi];
    }
    const out: number[] = [];
    for (let i = 0; i <= n; i++) out.push(this.lo + ((this.hi - this.lo) * i) / n);
    return out;
  }
}

export class Figure {
  readonly width: number;
  readonly height: number;
  readonly margins: Margins;
  private parts: string[] = [];

  constructor(width = 760, height = 520, margins?: Partial<Margins>) {
    this.width = width;
    this.height = height;
    this.margins = { left: 72, right: 24, top: 40, bottom: 56, ...margins };
  }

  xAxis(scale: Scale, lo: number, hi: number): Axis {
    return new Axis(scale, lo, hi, this.margins.left, this.width - this.margins.right);
  }

  yAxis(scale: Scale, lo: number, hi: number): Axis {
    return new Axis(scale, lo, hi, this.height - this.margins.bottom, this.margins.top);
  }

  title(text: string): void {
    this.parts.push(
      `<text x="${fmt(this.width / 2)}" y="22" text-anchor="middle" font-size="16" font-family="sans-serif">${escapeXml(text)}</text>`,
    );
  }

  axes(x: Axis, y: Axis, xLabel: string, yLabel: string): void {
    const { left, right, top, bottom } = this.margins;
    const x0 = left;
    const x1 = this.width - right;
    const y0 = this.height - bottom;
    const y1 = top;
    this.parts.push(`<rect x="${fmt(x0)}" y="${fmt(y1)}" width="${fmt(x1 - x0)}" height="${fmt(y0 - y1)}" fill="none" stroke="#333" stroke-width="1"/>`);
    for (const v of x.ticks()) {
      const px = x.pos(v);
      this.parts.push(`<line x1="${fmt(px)}" y1="${fmt(y0)}" x2="${fmt(px)}" y2="${fmt(y0 + 5)}" stroke="#333"/>`);
      this.parts.push(`<text x="${fmt(px)}" y="${fmt(y0 + 20)}" text-anchor="middle" font-size="11" font-family="sans-serif">${fmtTick(v)}</text>`);
      this.parts.push(`<line x1="${fmt(px)}" y1="${fmt(y0)}" x2="${fmt(px)}" y2="${fmt(y1)}" stroke="#eee"/>`);
    }
    for (const v of y.ticks()) {
      const py = y.pos(v);
      this.parts.push(`<line x1="${fmt(x0 - 5)}" y1="${fmt(py)}" x2="${fmt(x0)}" y2="${fmt(py)}" stroke="#333"/>`);
      this.parts.push(`<text x="${fmt(x0 - 8)}" y="${fmt(py + 4)}" text-anchor="end" font-size="11" font-family="sans-serif">${fmtTick(v)}</text>`);
      this.parts.push(`<line x1="${fmt(x0)}" y1="${fmt(py)}" x2="${fmt(x1)}" y2="${fmt(py)}" stroke="#eee"/>`);
    }
    this.parts.push(`<text x="${fmt((x0 + x1) / 2)}" y="${fmt(this.height - 12)}" text-anchor="middle" font-size="13" font-family="sans-serif">${escapeXml(xLabel)}</text>`);
    this.parts.push(`<text x="16" y="${fmt((y0 + y1) / 2)}" text-anchor="middle" font-size="13" font-family="sans-serif" transform="rotate(-90 16 ${fmt((y0 + y1) / 2)})">${escapeXml(yLabel)}</text>`);
  }

  polyline(x: Axis, y: Axis, xs: number[], ys: number[], stroke: string, opts: { width?: number; dash?: string } = {}): void {
    const pts = xs.map((v, i) => `${fmt(x.pos(v))},${fmt(y.pos(ys[i]))}`).join(" ");
    const dash = opts.dash ? ` stroke-dasharray="${opts.dash}"` : "";
    this.parts.push(`<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${opts.width ?? 1.5}"${dash}/>`);
  }

  markers(x: Axis, y: Axis, xs: number[], ys: number[], fill: string, r = 3, shape: "circle" | "cross" = "circle"): void {
    for (let i = 0; i < xs.length; i++) {
      const px = x.pos(xs[i]);
      const py = y.pos(ys[i]);
      if (shape === "circle") {
        this.parts.push(`<circle cx="${fmt(px)}" cy="${fmt(py)}" r="${r}" fill="${fill}"/>`);
      } else {
        this.parts.push(`<path d="M ${fmt(px - r)} ${fmt(py - r)} L ${fmt(px + r)} ${fmt(py + r)} M ${fmt(px - r)} ${fmt(py + r)} L ${fmt(px + r)} ${fmt(py - r)}" stroke="${fill}" stroke-width="2"/>`);
      }
    }
  }

  legend(entries: Array<{ label: string; stroke: string }>): void {
    const x0 = this.margins.left + 12;
    let yy = this.margins.top + 14;
    for (const e of entries) {
      this.parts.push(`<line x1="${fmt(x0)}" y1="${fmt(yy - 4)}" x2="${fmt(x0 + 24)}" y2="${fmt(yy - 4)}" stroke="${e.stroke}" stroke-width="2"/>`);
      this.parts.push(`<text x="${fmt(x0 + 30)}" y="${fmt(yy)}" font-size="12" font-family="sans-serif">${escapeXml(e.label)}</text>`);
      yy += 18;
    }
  }

  note(text: string, dy = 0): void {
    this.parts.push(`<text x="${fmt(this.width - this.margins.right - 8)}" y="${fmt(this.margins.top + 14 + dy)}" text-anchor="end" font-size="12" font-family="sans-serif">${escapeXml(text)}</text>`);
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
      "",
    ].join("\n");
  }
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
