/**
 * View-model for the what-if console.
 *
 * The rendered view is a pure function of (slider state, last API response):
 * building it twice from the same inputs yields identical curve arrays, which
 * keeps re-renders cheap to diff and trivially testable.
 */

import { CurvePoint, igQuantile, sampleCurve } from "./ig.js";

export interface WhatIfRow {
  pi: number[];
  median_hours: number;
  ig_mean: number;
  ig_shape: number;
}

export interface WhatIfResponse {
  rows: WhatIfRow[];
}

export interface ScenarioCurve {
  pi: number[];
  label: string;
  medianHours: number;
  curve: CurvePoint[];
}

export interface ScenarioView {
  curves: ScenarioCurve[];
  tMax: number;
  /** median spread between the first and last scenario, hours */
  spreadHours: number;
}

/** Force slider values to a valid proportion vector (non-negative, sum 1). */
export function normalizeSliders(values: number[]): number[] {
  if (values.length === 0) throw new RangeError("at least one slider required");
  const clipped = values.map((v) => (Number.isFinite(v) && v > 0 ? v : 0));
  const total = clipped.reduce((a, b) => a + b, 0);
  if (total === 0) {
    // all sliders at zero: fall back to a uniform mix
    return clipped.map(() => 1 / clipped.length);
  }
  return clipped.map((v) => v / total);
}

export function piLabel(pi: number[]): string {
  return "[" + pi.map((p) => p.toFixed(2).replace(/\.?0+$/, "")).join(", ") + "]";
}

/** Build the plotted view from a what-if response; pure and deterministic. */
export function buildView(response: WhatIfResponse, pointsPerCurve = 200): ScenarioView {
  if (response.rows.length === 0) throw new RangeError("empty what-if response");
  // shared time axis so the curves are visually comparable
  const tMax = Math.max(
    ...response.rows.map((r) =>
      igQuantile(0.995, { mean: r.ig_mean, shape: r.ig_shape })
    )
  );
  const curves = response.rows.map((r) => ({
    pi: r.pi,
    label: piLabel(r.pi),
    medianHours: r.median_hours,
    curve: sampleCurve({ mean: r.ig_mean, shape: r.ig_shape }, tMax, pointsPerCurve),
  }));
  const medians = curves.map((c) => c.medianHours);
  return {
    curves,
    tMax,
    spreadHours: medians[0] - medians[medians.length - 1],
  };
}

/** True when predicted medians never increase as the mix gets heavier. */
export function mediansOrdered(view: ScenarioView): boolean {
  const m = view.curves.map((c) => c.medianHours);
  return m.every((v, i) => i === 0 || m[i - 1] >= v);
}
