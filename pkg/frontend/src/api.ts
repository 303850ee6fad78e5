/** Typed client for the twin's JSON API.
 *
 * The dashboard performs no domain computation: everything it displays
 * comes out of one of these calls, so every rendered number is traceable
 * to a response body.
 */

export interface GridSpec {
  ncols: number;
  nrows: number;
  xll: number;
  yll: number;
  cellsize: number;
  nodata: number;
}

export interface ServiceDescriptor {
  id: string;
  name: string;
  category: string;
  endpoint: string | null;
  implemented: boolean;
}

export interface ServicesResponse {
  services: ServiceDescriptor[];
  layers: string[];
  scenarios: string[];
  roles: string[];
  catalog_version: string;
}

export interface RiskResponse {
  peril: string;
  x: number;
  y: number;
  scenario: string;
  score: number;
  class: number | null;
  catalog_version: string;
}

export interface RiskGridResponse {
  peril: string;
  scenario: string;
  spec: GridSpec;
  score: number[][];
  class: number[][];
  catalog_version: string;
}

export interface LayerResponse {
  name: string;
  units: string;
  spec: GridSpec;
  values: number[][];
  catalog_version: string;
}

export interface ProximityResponse {
  kind: string;
  x: number;
  y: number;
  feature_id: number;
  distance_m: number;
  catalog_version: string;
}

export interface PlacementResponse {
  chosen: number[];
  objective: number | null;
  feasible: boolean;
  mode: string;
  uncovered: number[];
  assignment: { node: number; site: number | null; minutes: number | null }[];
  targets?: number[];
  t_cover?: number;
  catalog_version: string;
}

export interface PvZoneResponse {
  rank: number;
  cell_count: number;
  score: number;
  polygon: number[][];
}

export interface FireSimResponse {
  steps: number;
  minutes_per_step: number;
  states: number[][][];
  burned_cells: number;
  catalog_version: string;
}

export interface EscapeResponse {
  feasible: boolean;
  path: number[];
  minutes: number | null;
  nodes: Record<string, [number, number]>;
  catalog_version: string;
}

export interface HeatmapResponse {
  roles: string[];
  categories: string[];
  matrix: number[][];
  catalog_version: string;
}

export interface JobResponse {
  job_id: string;
  status: "pending" | "running" | "done" | "failed";
  result?: unknown;
  error?: string;
}

export type MaybeJob<T> = T | { job_id: string; status: string };

export function isJobHandle(body: unknown): body is { job_id: string } {
  return typeof body === "object" && body !== null && "job_id" in body;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class TwinApi {
  constructor(private baseUrl = "", public role = "property_owner") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers = new Headers(init?.headers);
    headers.set("X-Role", this.role);
    if (init?.body) headers.set("Content-Type", "application/json");
    const response = await fetch(this.baseUrl + path, { ...init, headers });
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body.error ?? response.statusText);
    }
    return body as T;
  }

  private get<T>(path: string, params?: Record<string, string | number>) {
    const query = params
      ? "?" + new URLSearchParams(
          Object.entries(params).map(([k, v]) => [k, String(v)]))
      : "";
    return this.request<T>(path + query);
  }

  private post<T>(path: string, body: unknown) {
    return this.request<T>(path, { method: "POST", body: JSON.stringify(body) });
  }

  services() {
    return this.get<ServicesResponse>("/api/v1/services");
  }

  layer(name: string) {
    return this.get<LayerResponse>(`/api/v1/layers/${name}`);
  }

  riskAt(peril: string, x: number, y: number, scenario = "baseline") {
    return this.get<RiskResponse>(`/api/v1/risk/${peril}`, { x, y, scenario });
  }

  riskGrid(peril: string, scenario = "baseline") {
    return this.get<RiskGridResponse>(`/api/v1/risk/${peril}/grid`, { scenario });
  }

  proximity(kind: string, x: number, y: number) {
    return this.get<ProximityResponse>(`/api/v1/proximity/${kind}`, { x, y });
  }

  heatmap() {
    return this.get<HeatmapResponse>("/api/v1/telemetry/heatmap");
  }

  staleness(year: number) {
    return this.get<{ stale_categories: string[] }>(
      "/api/v1/catalog/staleness", { year });
  }

  job(id: string) {
    return this.get<JobResponse>(`/api/v1/jobs/${id}`);
  }

  submitCover(body: Record<string, unknown>) {
    return this.post<MaybeJob<PlacementResponse>>("/api/v1/scenario/cover", body);
  }

  submitKmedian(body: Record<string, unknown>) {
    return this.post<MaybeJob<PlacementResponse>>(
      "/api/v1/scenario/kmedian", body);
  }

  submitPv(body: Record<string, unknown>) {
    return this.post<MaybeJob<{ zones: PvZoneResponse[] }>>(
      "/api/v1/scenario/pv", body);
  }

  simulateFire(body: Record<string, unknown>) {
    return this.post<MaybeJob<FireSimResponse>>("/api/v1/fire/simulate", body);
  }

  escapeRoute(body: Record<string, unknown>) {
    return this.post<MaybeJob<EscapeResponse>>("/api/v1/fire/escape", body);
  }
}
