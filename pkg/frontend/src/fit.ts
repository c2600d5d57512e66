/**
 * Log-log least squares, matching the simulator's fitting convention:
 * values ~ constant * (1+t)^(-exponent) fitted as log(values) vs log(1+t),
 * and plain power laws values ~ constant * x^slope as log-log in x.
 */

export interface PowerLawFit {
  exponent: number; // positive for decaying data
  constant: number;
  residual: number; // RMS of log-space residuals
}

function leastSquares(x: number[], y: number[]): { slope: number; intercept: number; rms: number } {
  const n = x.length;
  let sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (let i = 0; i < n; i++) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const denom = n * sxx - sx * sx;
  if (denom === 0) {
    throw new Error("degenerate abscissa: all x identical");
  }
  const slope = (n * sxy - sx * sy) / denom;
  const intercept = (sy - slope * sx) / n;
  let ss = 0;
  for (let i = 0; i < n; i++) {
    const r = y[i] - (slope * x[i] + intercept);
    ss += r * r;
  }
  return { slope, intercept, rms: Math.sqrt(ss / n) };
}

/** Fit values ~ C (1+t)^(-p) on a closed window [t0, t1]; needs >= 8 samples. */
export function fitPowerLaw(
  times: number[], values: number[], window: [number, number],
): PowerLawFit {
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i < times.length; i++) {
    if (times[i] >= window[0] && times[i] <= window[1]) {
      if (values[i] <= 0) {
        throw new Error("values must be positive on the fit window");
      }
      xs.push(Math.log1p(times[i]));
      ys.push(Math.log(values[i]));
    }
  }
  if (xs.length < 8) {
    throw new Error(`need >= 8 samples in window [${window[0]}, ${window[1]}], got ${xs.length}`);
  }
  const { slope, intercept, rms } = leastSquares(xs, ys);
  return { exponent: -slope, constant: Math.exp(intercept), residual: rms };
}

/** Plain log-log slope of y vs x (e.g. difference norms vs epsilon). */
export function logLogSlope(x: number[], y: number[]): number {
  if (x.length < 2) {
    throw new Error("need at least two points for a slope");
  }
  const xs = x.map((v) => Math.log(v));
  const ys = y.map((v) => Math.log(Math.max(v, 1e-300)));
  return leastSquares(xs, ys).slope;
}
