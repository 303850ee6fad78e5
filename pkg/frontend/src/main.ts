/** Dashboard bootstrap: wires the API client, layer view, scenario panels
 * and telemetry heatmap onto the static page served at /. */

import { PlacementResponse, RiskGridResponse, TwinApi } from "./api.js";
import { cellCenter, cellPopup, layerKind, legendFor, paintGrid,
         pixelToCell, renderLegend } from "./layerView.js";
import { ScenarioRunner, coverRequestBody, fireFrames, fireSummary,
         placementDiff, placementMarkers, placementSummary,
         pvSummary } from "./scenarioPanel.js";
import { ROLES, ViewState, initialState, recordResult, setActiveLayer,
         setRole } from "./state.js";
import { renderHeatmap } from "./telemetryView.js";

const api = new TwinApi("");
let state: ViewState;
let lastCover: PlacementResponse | null = null;
let riskGridCache: RiskGridResponse | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function showLayer(name: string, layers: string[]): Promise<void> {
  state = setActiveLayer(state, name, layers);
  const canvas = el<HTMLCanvasElement>("map-canvas");
  const legend = el<HTMLElement>("legend");
  if (name.startsWith("risk:")) {
    const peril = name.slice(5);
    const grid = await api.riskGrid(peril);
    riskGridCache = grid;
    paintGrid(canvas, grid.class, "class", grid.spec.nodata);
    renderLegend(legend, legendFor("class"));
  } else {
    riskGridCache = null;
    const layer = await api.layer(name);
    paintGrid(canvas, layer.values, layerKind(name), layer.spec.nodata);
    renderLegend(legend, legendFor(layerKind(name)));
  }
  el<HTMLElement>("layer-title").textContent = name;
}

async function onMapClick(event: MouseEvent, peril: string): Promise<void> {
  const canvas = el<HTMLCanvasElement>("map-canvas");
  const rect = canvas.getBoundingClientRect();
  const spec = riskGridCache?.spec
    ?? (await api.layer(state.activeLayer)).spec;
  const { i, j } = pixelToCell(event.clientX - rect.left,
                               event.clientY - rect.top,
                               rect.width, rect.height, spec);
  const { x, y } = cellCenter(i, j, spec);
  const risk = await api.riskAt(peril, x, y);
  el<HTMLElement>("popup").innerText = cellPopup(risk).join("\n");
}

function markerText(markers: ReturnType<typeof placementMarkers>): string {
  return markers.map((m) =>
    `${m.kind === "station" ? "S" : "!"}${m.node}`).join("  ");
}

async function runCover(): Promise<void> {
  const runner = coverRunner;
  const t = Number(el<HTMLInputElement>("cover-t").value);
  const peril = el<HTMLSelectElement>("cover-peril").value;
  const out = el<HTMLElement>("cover-result");
  out.textContent = "running...";
  const result = await runner.run<PlacementResponse>(
    api, () => api.submitCover(coverRequestBody({ t_cover: t, peril })));
  if (result === null) return; // cancelled by a newer run
  out.textContent = placementSummary(result) + "\n"
    + markerText(placementMarkers(result));
  if (lastCover) {
    const diff = placementDiff(lastCover, result);
    el<HTMLElement>("cover-diff").textContent =
      `vs previous: ${diff.countDelta >= 0 ? "+" : ""}${diff.countDelta} `
      + `stations (added ${diff.added.length}, removed ${diff.removed.length})`;
  }
  lastCover = result;
  state = recordResult(state, { kind: "cover", label: `T=${t}`,
                                body: result });
}

const coverRunner = new ScenarioRunner();
const fireRunner = new ScenarioRunner();

async function runFire(): Promise<void> {
  const x = Number(el<HTMLInputElement>("fire-x").value);
  const y = Number(el<HTMLInputElement>("fire-y").value);
  const out = el<HTMLElement>("fire-result");
  out.textContent = "running...";
  const sim = await fireRunner.run(api, () => api.simulateFire({
    ignite: [{ x, y }], max_steps: 30, mode: "stochastic", seed: 7, p0: 0.85,
  }));
  if (!sim) return;
  out.textContent = fireSummary(sim);
  const frames = fireFrames(sim);
  const canvas = el<HTMLCanvasElement>("fire-canvas");
  let frame = 0;
  const timer = setInterval(() => {
    paintGrid(canvas, frames[frame], "cover", -9999);
    frame += 1;
    if (frame >= frames.length) clearInterval(timer);
  }, 250);
}

async function boot(): Promise<void> {
  const services = await api.services();
  state = initialState(services.layers[0] ?? "elevation");

  const roleSelect = el<HTMLSelectElement>("role-select");
  for (const role of ROLES) {
    const opt = document.createElement("option");
    opt.value = role;
    opt.textContent = role.replace("_", " ");
    roleSelect.appendChild(opt);
  }
  roleSelect.value = state.role;
  roleSelect.addEventListener("change", () => {
    state = setRole(state, roleSelect.value);
    api.role = state.role;
  });

  const layerSelect = el<HTMLSelectElement>("layer-select");
  const layerChoices = [
    ...["wildfire", "flood", "landslide", "earthquake", "subsidence"].map(
      (p) => `risk:${p}`),
    ...services.layers,
  ];
  for (const name of layerChoices) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    layerSelect.appendChild(opt);
  }
  const available = [...layerChoices];
  layerSelect.addEventListener("change", () =>
    showLayer(layerSelect.value, available));

  el<HTMLCanvasElement>("map-canvas").addEventListener("click", (event) => {
    const active = layerSelect.value;
    const peril = active.startsWith("risk:") ? active.slice(5) : "wildfire";
    void onMapClick(event, peril);
  });

  el<HTMLButtonElement>("cover-run").addEventListener("click",
                                                      () => void runCover());
  el<HTMLInputElement>("cover-t").addEventListener("input",
                                                   () => coverRunner.cancel());
  el<HTMLButtonElement>("fire-run").addEventListener("click",
                                                     () => void runFire());

  el<HTMLButtonElement>("telemetry-refresh").addEventListener(
    "click", async () => {
      renderHeatmap(el<HTMLElement>("telemetry"), await api.heatmap());
    });

  layerSelect.value = "risk:wildfire";
  await showLayer("risk:wildfire", available);
  renderHeatmap(el<HTMLElement>("telemetry"), await api.heatmap());
}

void boot();
