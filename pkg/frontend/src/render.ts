/**
 * SVG generation for the what-if chart.
 *
 * Pure string builders: given a view-model they emit the same markup every
 * time, so the chart can be replaced wholesale on each update.
 */

import { ScenarioView, ScenarioCurve } from "./state.js";

export interface ChartGeometry {
  width: number;
  height: number;
  marginLeft: number;
  marginBottom: number;
}

export const DEFAULT_GEOMETRY: ChartGeometry = {
  width: 640,
  height: 320,
  marginLeft: 40,
  marginBottom: 24,
};

const COLORS = ["#2166ac", "#762a83", "#b2182b"];

function scaleX(t: number, tMax: number, g: ChartGeometry): number {
  return g.marginLeft + (t / tMax) * (g.width - g.marginLeft - 8);
}

function scaleY(v: number, vMax: number, g: ChartGeometry): number {
  const plotH = g.height - g.marginBottom - 8;
  return 8 + plotH * (1 - v / vMax);
}

export function curvePath(
  curve: ScenarioCurve,
  tMax: number,
  pdfMax: number,
  g: ChartGeometry = DEFAULT_GEOMETRY
): string {
  return curve.curve
    .map((p, i) => {
      const cmd = i === 0 ? "M" : "L";
      return `${cmd}${scaleX(p.t, tMax, g).toFixed(2)},${scaleY(p.pdf, pdfMax, g).toFixed(2)}`;
    })
    .join(" ");
}

/** One density curve per scenario plus a dotted median marker each. */
export function chartSvg(view: ScenarioView, g: ChartGeometry = DEFAULT_GEOMETRY): string {
  const pdfMax = Math.max(
    ...view.curves.flatMap((c) => c.curve.map((p) => p.pdf))
  );
  const parts: string[] = [
    `<svg viewBox="0 0 ${g.width} ${g.height}" xmlns="http://www.w3.org/2000/svg">`,
  ];
  view.curves.forEach((c, i) => {
    const color = COLORS[i % COLORS.length];
    parts.push(
      `<path d="${curvePath(c, view.tMax, pdfMax, g)}" fill="none" ` +
        `stroke="${color}" stroke-width="1.5" data-pi="${c.label}"/>`
    );
    const mx = scaleX(c.medianHours, view.tMax, g).toFixed(2);
    parts.push(
      `<line x1="${mx}" y1="8" x2="${mx}" y2="${g.height - g.marginBottom}" ` +
        `stroke="${color}" stroke-dasharray="4 3" data-median="${c.label}"/>`
    );
  });
  parts.push(
    `<line x1="${g.marginLeft}" y1="${g.height - g.marginBottom}" ` +
      `x2="${g.width - 8}" y2="${g.height - g.marginBottom}" stroke="#444"/>`
  );
  parts.push("</svg>");
  return parts.join("");
}

/** Table-III-style grid of predicted lifetimes (hours) per scenario. */
export function lifetimeTableHtml(view: ScenarioView): string {
  const header = "<tr><th>&pi;</th><th>median RUL (h)</th></tr>";
  const rows = view.curves
    .map((c) => `<tr><td>${c.label}</td><td>${c.medianHours.toFixed(1)}</td></tr>`)
    .join("");
  return `<table>${header}${rows}</table>`;
}
