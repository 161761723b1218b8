/** Convergence-slope estimators on log-log data. */

import { SchemaError } from "./csv.js";

export interface ConvergenceSeries {
  /** refinement parameter (h, dt, ...), strictly decreasing */
  param: number[];
  /** positive error norms, same length */
  err: number[];
}

export function validateSeries(s: ConvergenceSeries): void {
  if (s.param.length !== s.err.length || s.param.length < 2) {
    throw new SchemaError("need at least two rows of matching parameter/error data");
  }
  for (let i = 1; i < s.param.length; i++) {
    if (!(s.param[i] < s.param[i - 1])) {
      throw new SchemaError("parameter column must be strictly decreasing");
    }
  }
  if (s.err.some((e) => !(e > 0))) {
    throw new SchemaError("error values must be positive");
  }
}

/** Pairwise slopes log(e_{i-1}/e_i) / log(p_{i-1}/p_i), one per refinement. */
export function pairwiseSlopes(s: ConvergenceSeries): number[] {
  validateSeries(s);
  const out: number[] = [];
  for (let i = 1; i < s.param.length; i++) {
    out.push(
      Math.log(s.err[i - 1] / s.err[i]) / Math.log(s.param[i - 1] / s.param[i])
    );
  }
  return out;
}

/** Least-squares slope of log(err) against log(param). */
export function fittedSlope(s: ConvergenceSeries): number {
  validateSeries(s);
  const x = s.param.map(Math.log);
  const y = s.err.map(Math.log);
  const n = x.length;
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let sxy = 0;
  let sxx = 0;
  for (let i = 0; i < n; i++) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}
