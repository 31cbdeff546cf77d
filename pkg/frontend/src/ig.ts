/**
 * Inverse-Gaussian distribution, client side.
 *
 * The dashboard draws closed-form lifetime curves locally from the (mean,
 * shape) parameters the service returns, so slider interaction never waits on
 * the network.  The cdf here is held to the server's values to 1e-6 by the
 * test suite's reference fixtures.
 */

const SQRT_2 = Math.SQRT2;
const INV_SQRT_PI = 1 / Math.sqrt(Math.PI);

/** erf via its Maclaurin series; accurate to ~1e-12 for |x| <= 3. */
function erfSeries(x: number): number {
  let term = x;
  let sum = x;
  for (let n = 1; n < 120; n++) {
    term *= (-x * x) / n;
    const add = term / (2 * n + 1);
    sum += add;
    if (Math.abs(add) < 1e-17 * Math.abs(sum)) break;
  }
  return (2 * INV_SQRT_PI) * sum;
}

/** Scaled complementary error function erfc(x)*exp(x^2) for x >= 2,
 * by the classical continued fraction evaluated bottom-up. */
function erfcxCf(x: number): number {
  let cf = 0;
  for (let k = 80; k >= 1; k--) {
    cf = (k / 2) / (x + cf);
  }
  return INV_SQRT_PI / (x + cf);
}

export function erfc(x: number): number {
  if (x < 0) return 2 - erfc(-x);
  if (x < 2.5) return 1 - erfSeries(x);
  return erfcxCf(x) * Math.exp(-x * x);
}

/** Standard normal cdf. */
export function normCdf(z: number): number {
  return 0.5 * erfc(-z / SQRT_2);
}

/** log of the standard normal cdf, safe deep into the lower tail. */
export function logNormCdf(z: number): number {
  if (z > -3) return Math.log(normCdf(z));
  const x = -z / SQRT_2;
  return Math.log(0.5 * erfcxCf(x)) - x * x;
}

export interface IgParams {
  mean: number;
  shape: number;
}

export function igPdf(t: number, { mean, shape }: IgParams): number {
  if (t <= 0) return 0;
  const z = (t - mean) / mean;
  return Math.sqrt(shape / (2 * Math.PI * t * t * t)) *
    Math.exp((-shape * z * z) / (2 * t));
}

export function igCdf(t: number, { mean, shape }: IgParams): number {
  if (t <= 0) return 0;
  const u = Math.sqrt(shape / t);
  const first = normCdf(u * (t / mean - 1));
  // the exp(2*shape/mean) factor overflows alone; fold it into the log of the
  // (tiny) mirrored normal tail before exponentiating
  const second = Math.exp(2 * shape / mean + logNormCdf(-u * (t / mean + 1)));
  return Math.min(1, first + second);
}

/** Quantile by bisection; the cdf is monotone so this is robust. */
export function igQuantile(p: number, params: IgParams): number {
  if (p <= 0 || p >= 1) throw new RangeError(`p must be in (0, 1), got ${p}`);
  let lo = 0;
  let hi = params.mean;
  while (igCdf(hi, params) < p) {
    lo = hi;
    hi *= 2;
    if (!Number.isFinite(hi)) throw new RangeError("quantile bracket diverged");
  }
  for (let i = 0; i < 200 && (hi - lo) > 1e-12 * hi; i++) {
    const mid = 0.5 * (lo + hi);
    if (igCdf(mid, params) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

export interface CurvePoint {
  t: number;
  pdf: number;
  cdf: number;
}

/** Evenly sampled pdf/cdf curve over (0, tMax]. */
export function sampleCurve(params: IgParams, tMax: number, n = 200): CurvePoint[] {
  const points: CurvePoint[] = [];
  for (let i = 1; i <= n; i++) {
    const t = (tMax * i) / n;
    points.push({ t, pdf: igPdf(t, params), cdf: igCdf(t, params) });
  }
  return points;
}
