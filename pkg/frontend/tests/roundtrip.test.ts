/** Round-trip acceptance: the dashboard's own client and view-models against
 * a live twin server (spawned in globalSetup). Verifies that what the UI
 * renders is exactly what the API returned. */

import { beforeAll, describe, expect, it } from "vitest";

import { PlacementResponse, TwinApi } from "../src/api.js";
import { cellCenter, cellPopup, pixelToCell } from "../src/layerView.js";
import { ScenarioRunner, coverRequestBody, placementDiff,
         placementMarkers } from "../src/scenarioPanel.js";
import { heatmapCells } from "../src/telemetryView.js";

const base = () => process.env.TWIN_BASE_URL;

describe.skipIf(!process.env.TWIN_BASE_URL)("dashboard round trip", () => {
  let api: TwinApi;

  beforeAll(() => {
    api = new TwinApi(base()!, "municipality");
  });

  it("cover submission renders exactly the API's station set", async () => {
    const runner = new ScenarioRunner();
    const result = await runner.run<PlacementResponse>(
      api, () => api.submitCover(coverRequestBody({ t_cover: 7.5,
                                                    peril: "wildfire" })));
    expect(result).not.toBeNull();
    const markers = placementMarkers(result!);
    const rendered = markers.filter((m) => m.kind === "station")
      .map((m) => m.node);
    expect(rendered).toEqual(result!.chosen);
    const uncoveredMarkers = markers.filter((m) => m.kind === "uncovered")
      .map((m) => m.node);
    expect(uncoveredMarkers).toEqual(result!.uncovered);
  });

  it("raising T_cover from 5 to 10 min never adds stations", async () => {
    const runner = new ScenarioRunner();
    const at5 = await runner.run<PlacementResponse>(
      api, () => api.submitCover(coverRequestBody({ t_cover: 5,
                                                    peril: "wildfire" })));
    const at10 = await runner.run<PlacementResponse>(
      api, () => api.submitCover(coverRequestBody({ t_cover: 10,
                                                    peril: "wildfire" })));
    expect(at5).not.toBeNull();
    expect(at10).not.toBeNull();
    expect(at10!.chosen.length).toBeLessThanOrEqual(at5!.chosen.length);
    const diff = placementDiff(at5!, at10!);
    expect(diff.countDelta).toBeLessThanOrEqual(0);
  });

  it("clicking a map cell shows the same class as GET /risk", async () => {
    const grid = await api.riskGrid("wildfire");
    const spec = grid.spec;
    // simulate clicks across the canvas
    for (const [px, py] of [[10, 10], [300, 200], [511, 511]] as const) {
      const { i, j } = pixelToCell(px, py, 512, 512, spec);
      const { x, y } = cellCenter(i, j, spec);
      const risk = await api.riskAt("wildfire", x, y);
      const lines = cellPopup(risk);
      expect(lines).toContain(`class: ${risk.class}`);
      // the popup's class equals the grid endpoint's class for that cell
      expect(risk.class).toBe(grid.class[i][j]);
      expect(risk.score).toBe(grid.score[i][j]);
    }
  });

  it("heatmap cells equal the endpoint matrix verbatim", async () => {
    // the calls above recorded municipality usage
    const body = await api.heatmap();
    const cells = heatmapCells(body);
    for (let r = 0; r < body.roles.length; r++) {
      for (let c = 0; c < body.categories.length; c++) {
        expect(cells[r][c].value).toBe(body.matrix[r][c]);
      }
      const rowMax = Math.max(...body.matrix[r]);
      expect(rowMax === 0 || rowMax === 1).toBe(true);
    }
  });

  it("fire simulation frames come straight from the API", async () => {
    const services = await api.services();
    expect(services.services).toHaveLength(27);
    // find a flammable spot via the fuel layer endpoint
    const fuel = await api.layer("fuel");
    let spot: { x: number; y: number } | null = null;
    outer: for (let i = 0; i < fuel.spec.nrows; i++) {
      for (let j = 0; j < fuel.spec.ncols; j++) {
        if (fuel.values[i][j] > 0.6) {
          spot = cellCenter(i, j, fuel.spec);
          break outer;
        }
      }
    }
    expect(spot).not.toBeNull();
    const runner = new ScenarioRunner();
    const sim = await runner.run(api, () => api.simulateFire({
      ignite: [spot!], max_steps: 5, mode: "stochastic", seed: 3, p0: 0.9,
    }));
    expect(sim).not.toBeNull();
    expect(sim!.states.length).toBe(sim!.steps + 1);
  });
});
