/** Least-squares power-law fit value = C * h^beta on log-log axes. */

export interface PowerFit {
  c: number;
  beta: number;
}

export function powerFit(h: number[], value: number[]): PowerFit | null {
  const lh: number[] = [];
  const lv: number[] = [];
  for (let i = 0; i < h.length; i++) {
    if (value[i] > 0 && h[i] > 0) {
      lh.push(Math.log(h[i]));
      lv.push(Math.log(value[i]));
    }
  }
  if (lh.length < 2) return null;
  const n = lh.length;
  const mx = lh.reduce((a, b) => a + b, 0) / n;
  const my = lv.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (lh[i] - mx) * (lh[i] - mx);
    sxy += (lh[i] - mx) * (lv[i] - my);
  }
  const beta = sxy / sxx;
  return { c: Math.exp(my - beta * mx), beta };
}
