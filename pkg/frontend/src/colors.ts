/** Color scales for layers, hazard classes and the usage heatmap. */

export interface LegendEntry {
  value: number;
  color: string;
  label: string;
  tooltip: string;
}

/** Hazard class palette, 1 (minimal) to 5 (very high). */
export const CLASS_COLORS: Record<number, string> = {
  1: "#2c7bb6",
  2: "#abd9e9",
  3: "#ffffbf",
  4: "#fdae61",
  5: "#d7191c",
};

export const CLASS_LEGEND: LegendEntry[] = [
  { value: 1, color: CLASS_COLORS[1], label: "1 - minimal",
    tooltip: "Class 1: no meaningful chance of an event at this location." },
  { value: 2, color: CLASS_COLORS[2], label: "2 - low",
    tooltip: "Class 2: events are possible here but rare and mild." },
  { value: 3, color: CLASS_COLORS[3], label: "3 - moderate",
    tooltip: "Class 3: occasional events of moderate strength can occur." },
  { value: 4, color: CLASS_COLORS[4], label: "4 - high",
    tooltip: "Class 4: events are likely enough that minor damage should be "
      + "planned for." },
  { value: 5, color: CLASS_COLORS[5], label: "5 - very high",
    tooltip: "Class 5: events are expected here and damage is probable." },
];

/** Land-cover palette keyed by the engine's cover codes. */
export const COVER_COLORS: Record<number, string> = {
  0: "#4575b4", // water
  1: "#878787", // urban
  2: "#1a9850", // forest
  3: "#a6d96a", // shrub
  4: "#fee08b", // agriculture
  5: "#d9b382", // bare
};

export const COVER_LABELS: Record<number, string> = {
  0: "water", 1: "urban", 2: "forest", 3: "shrub",
  4: "agriculture", 5: "bare",
};

function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t;
}

function hex(r: number, g: number, b: number): string {
  const c = (v: number) =>
    Math.max(0, Math.min(255, Math.round(v))).toString(16).padStart(2, "0");
  return `#${c(r)}${c(g)}${c(b)}`;
}

/** Continuous ramp for scalar layers: deep blue -> pale yellow -> dark red. */
export function rampColor(t: number): string {
  const v = Math.max(0, Math.min(1, t));
  if (v < 0.5) {
    const u = v / 0.5;
    return hex(lerp(49, 255, u), lerp(54, 255, u), lerp(149, 191, u));
  }
  const u = (v - 0.5) / 0.5;
  return hex(lerp(255, 165, u), lerp(255, 0, u), lerp(191, 38, u));
}

/** Usage heatmap shade: 0 renders lightest, 1 darkest (heavier use). */
export function heatmapShade(v: number): string {
  const u = Math.max(0, Math.min(1, v));
  const channel = Math.round(245 - u * 195);
  return hex(channel, channel + 4, 255 - Math.round(u * 55));
}
