import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { igCdf, igPdf, igQuantile, normCdf } from "../src/ig.js";

interface RefPoint {
  mean: number;
  shape: number;
  t: number;
  cdf: number;
}

const fixture: { points: RefPoint[] } = JSON.parse(
  readFileSync(
    fileURLToPath(new URL("./fixtures/ig_reference.json", import.meta.url)),
    "utf8"
  )
);

describe("normCdf", () => {
  it("matches known values", () => {
    expect(normCdf(0)).toBeCloseTo(0.5, 12);
    expect(normCdf(1.96)).toBeCloseTo(0.9750021048517795, 10);
    expect(normCdf(-1.96)).toBeCloseTo(0.024997895148220435, 10);
    expect(normCdf(-6)).toBeCloseTo(9.865876450376946e-10, 14);
  });

  it("is symmetric", () => {
    for (const z of [0.3, 1.1, 2.7, 4.4]) {
      expect(normCdf(z) + normCdf(-z)).toBeCloseTo(1, 12);
    }
  });
});

describe("igCdf against server reference points", () => {
  it("matches all 10 fixture points to 1e-6", () => {
    expect(fixture.points).toHaveLength(10);
    for (const p of fixture.points) {
      const got = igCdf(p.t, { mean: p.mean, shape: p.shape });
      expect(Math.abs(got - p.cdf)).toBeLessThanOrEqual(1e-6);
    }
  });
});

describe("igCdf shape", () => {
  const params = { mean: 12, shape: 36 };

  it("is zero at and below t=0 and approaches one", () => {
    expect(igCdf(0, params)).toBe(0);
    expect(igCdf(-3, params)).toBe(0);
    expect(igCdf(1e4, params)).toBeCloseTo(1, 9);
  });

  it("is non-decreasing", () => {
    let prev = 0;
    for (let t = 0.5; t < 60; t += 0.5) {
      const v = igCdf(t, params);
      expect(v).toBeGreaterThanOrEqual(prev);
      prev = v;
    }
  });

  it("integrates the pdf (trapezoid cross-check)", () => {
    const n = 20000;
    const tMax = 30;
    let acc = 0;
    for (let i = 1; i <= n; i++) {
      const a = ((i - 1) * tMax) / n;
      const b = (i * tMax) / n;
      acc += 0.5 * (igPdf(a, params) + igPdf(b, params)) * (b - a);
    }
    expect(acc).toBeCloseTo(igCdf(tMax, params), 6);
  });
});

describe("igQuantile", () => {
  it("round-trips through the cdf", () => {
    const params = { mean: 17.1, shape: 900 };
    for (const p of [0.01, 0.25, 0.5, 0.9, 0.99]) {
      expect(igCdf(igQuantile(p, params), params)).toBeCloseTo(p, 9);
    }
  });

  it("rejects out-of-range probabilities", () => {
    expect(() => igQuantile(0, { mean: 1, shape: 1 })).toThrow(RangeError);
    expect(() => igQuantile(1, { mean: 1, shape: 1 })).toThrow(RangeError);
  });
});
