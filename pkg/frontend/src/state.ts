/** Dashboard view state and its invariants.
 *
 * Pure data + pure transitions: the active layer must exist in the service
 * catalog, the role must be one of the six stakeholder groups, and scenario
 * results rotate through last/previous so runs can be diffed.
 */

export const ROLES = [
  "bank_insurance", "real_estate", "property_owner",
  "municipality", "farmer", "forestry",
] as const;

export type Role = (typeof ROLES)[number];

export interface Viewport {
  centerX: number;
  centerY: number;
  zoom: number;
}

export interface ScenarioOutcome {
  kind: "cover" | "kmedian" | "pv" | "fire";
  label: string;
  body: unknown;
}

export interface ViewState {
  viewport: Viewport;
  activeLayer: string;
  role: Role;
  scenarioForm: Record<string, string>;
  lastResult: ScenarioOutcome | null;
  previousResult: ScenarioOutcome | null;
}

export function initialState(activeLayer: string): ViewState {
  return {
    viewport: { centerX: 0, centerY: 0, zoom: 1 },
    activeLayer,
    role: "property_owner",
    scenarioForm: {},
    lastResult: null,
    previousResult: null,
  };
}

export function setActiveLayer(state: ViewState, layer: string,
                               available: string[]): ViewState {
  if (!available.includes(layer)) {
    throw new Error(`layer ${layer} is not in the service catalog`);
  }
  return { ...state, activeLayer: layer };
}

export function setRole(state: ViewState, role: string): ViewState {
  if (!(ROLES as readonly string[]).includes(role)) {
    throw new Error(`unknown role ${role}`);
  }
  return { ...state, role: role as Role };
}

export function updateForm(state: ViewState, field: string,
                           value: string): ViewState {
  return { ...state, scenarioForm: { ...state.scenarioForm, [field]: value } };
}

/** Record a finished run; the prior run shifts into previousResult. */
export function recordResult(state: ViewState,
                             result: ScenarioOutcome): ViewState {
  return { ...state, previousResult: state.lastResult, lastResult: result };
}
