/**
 * Page wiring: sliders -> normalized scenario -> what-if request -> chart.
 *
 * The three preset buttons mirror the service's canonical mixes; dragging a
 * slider replaces the middle preset with the custom mix.
 */

import { ApiClient } from "./api.js";
import { chartSvg, lifetimeTableHtml } from "./render.js";
import { buildView, normalizeSliders } from "./state.js";

const PRESETS: number[][] = [
  [1, 0],
  [0.5, 0.5],
  [0, 1],
];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(message: string | null): void {
  const banner = el<HTMLDivElement>("error-banner");
  banner.textContent = message ?? "";
  banner.style.display = message ? "block" : "none";
}

async function refresh(client: ApiClient, robotId: string, custom: number[]): Promise<void> {
  const scenarios = [PRESETS[0], normalizeSliders(custom), PRESETS[2]];
  try {
    const response = await client.whatIf(robotId, scenarios);
    if (response === null) return; // superseded by a newer drag
    const view = buildView(response);
    el<HTMLDivElement>("chart").innerHTML = chartSvg(view);
    el<HTMLDivElement>("lifetimes").innerHTML = lifetimeTableHtml(view);
    showError(null);
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
  }
}

export function init(): void {
  const client = new ApiClient(
    (window as unknown as { RULCAST_API?: string }).RULCAST_API ?? "http://127.0.0.1:8080"
  );
  const robotInput = el<HTMLInputElement>("robot-id");
  const light = el<HTMLInputElement>("slider-light");
  const heavy = el<HTMLInputElement>("slider-heavy");
  const readout = el<HTMLSpanElement>("pi-readout");

  const rerun = () => {
    const pi = normalizeSliders([Number(light.value), Number(heavy.value)]);
    readout.textContent = pi.map((p) => p.toFixed(2)).join(" / ");
    void refresh(client, robotInput.value, pi);
  };
  light.addEventListener("input", rerun);
  heavy.addEventListener("input", rerun);
  robotInput.addEventListener("change", rerun);
  el<HTMLButtonElement>("run").addEventListener("click", rerun);
}

if (typeof document !== "undefined" && document.getElementById("chart")) {
  init();
}
