/** Scenario panel view-models: submit, poll, render, diff against last run.
 *
 * Everything rendered is a direct projection of an API response; the diff
 * helpers only compare two responses, they never recompute domain results.
 */

import { EscapeResponse, FireSimResponse, GridSpec, PlacementResponse,
         PvZoneResponse, TwinApi } from "./api.js";
import { Poller } from "./jobs.js";

export interface Marker {
  node: number;
  kind: "station" | "uncovered" | "path";
}

/** Markers for a placement run: exactly the chosen set plus uncovered warnings. */
export function placementMarkers(result: PlacementResponse): Marker[] {
  const markers: Marker[] = result.chosen.map(
    (node) => ({ node, kind: "station" as const }));
  for (const node of result.uncovered) {
    markers.push({ node, kind: "uncovered" });
  }
  return markers;
}

export interface PlacementDiff {
  added: number[];
  removed: number[];
  kept: number[];
  countDelta: number;
}

export function placementDiff(prev: PlacementResponse,
                              next: PlacementResponse): PlacementDiff {
  const before = new Set(prev.chosen);
  const after = new Set(next.chosen);
  return {
    added: next.chosen.filter((n) => !before.has(n)),
    removed: prev.chosen.filter((n) => !after.has(n)),
    kept: next.chosen.filter((n) => before.has(n)),
    countDelta: next.chosen.length - prev.chosen.length,
  };
}

export function placementSummary(result: PlacementResponse): string {
  const count = result.chosen.length;
  if (result.mode === "cover") {
    const warn = result.feasible
      ? "all targets covered"
      : `${result.uncovered.length} target(s) unreachable`;
    return `${count} station(s), ${warn}`;
  }
  const objective = result.objective === null
    ? "unreachable demand" : `${result.objective.toFixed(2)} min mean`;
  return `${count} site(s), ${objective}`;
}

export function pvSummary(zones: PvZoneResponse[]): string[] {
  return zones.map((z) =>
    `#${z.rank}: ${z.cell_count} cells, score ${z.score.toFixed(3)}`);
}

/** Per-frame cell states for the burn animation player. */
export function fireFrames(sim: FireSimResponse): number[][][] {
  return sim.states;
}

export function fireSummary(sim: FireSimResponse): string {
  return `${sim.steps} step(s) of ${sim.minutes_per_step} min, `
    + `${sim.burned_cells} cell(s) in the final envelope`;
}

export function escapeSummary(route: EscapeResponse): string {
  if (!route.feasible) return "no safe route";
  return `safe after ${route.minutes?.toFixed(1)} min via `
    + route.path.join(" > ");
}

/** One in-flight job per panel: a new submit cancels the previous poll. */
export class ScenarioRunner {
  private poller: Poller | null = null;

  cancel(): void {
    this.poller?.cancel();
  }

  async run<T>(api: TwinApi,
               submit: () => Promise<T | { job_id: string; status: string }>,
  ): Promise<T | null> {
    this.cancel();
    const poller = new Poller();
    this.poller = poller;
    const submitted = await submit();
    const result = await poller.follow<T>(api, submitted);
    return poller.isCancelled ? null : result;
  }
}

export interface CoverFormValues {
  t_cover: number;
  peril: string;
}

export function coverRequestBody(form: CoverFormValues,
                                 async = false): Record<string, unknown> {
  return { t_cover: form.t_cover, peril: form.peril, async };
}
