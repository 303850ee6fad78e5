/** Raster layer rendering: JSON grid -> colored canvas, legend, cell popup.
 *
 * Grids are desk-scale, so they arrive as plain JSON arrays and are painted
 * client-side. All numbers shown in the popup come straight from one
 * GET /risk response.
 */

import { GridSpec, RiskResponse } from "./api.js";
import { CLASS_COLORS, CLASS_LEGEND, COVER_COLORS, LegendEntry,
         rampColor } from "./colors.js";

export type LayerKind = "class" | "cover" | "scalar";

export function layerKind(name: string): LayerKind {
  if (name.endsWith("_class") || name.startsWith("risk_class")) return "class";
  if (name === "landcover" || name === "geology") return "cover";
  return "scalar";
}

function parseHex(color: string): [number, number, number] {
  return [parseInt(color.slice(1, 3), 16), parseInt(color.slice(3, 5), 16),
          parseInt(color.slice(5, 7), 16)];
}

/** RGBA pixel buffer for a grid; pure so tests can check the mapping. */
export function gridToPixels(values: number[][], kind: LayerKind,
                             nodata: number): Uint8ClampedArray {
  const nrows = values.length;
  const ncols = values[0]?.length ?? 0;
  const out = new Uint8ClampedArray(nrows * ncols * 4);
  let lo = Infinity;
  let hi = -Infinity;
  if (kind === "scalar") {
    for (const row of values) {
      for (const v of row) {
        if (v === nodata) continue;
        if (v < lo) lo = v;
        if (v > hi) hi = v;
      }
    }
    if (!(hi > lo)) {
      lo = 0;
      hi = 1;
    }
  }
  for (let i = 0; i < nrows; i++) {
    for (let j = 0; j < ncols; j++) {
      const v = values[i][j];
      const k = (i * ncols + j) * 4;
      if (v === nodata) {
        out[k + 3] = 0;
        continue;
      }
      let color: string;
      if (kind === "class") {
        color = CLASS_COLORS[Math.round(v)] ?? "#cccccc";
      } else if (kind === "cover") {
        color = COVER_COLORS[Math.round(v)] ?? "#cccccc";
      } else {
        color = rampColor((v - lo) / (hi - lo));
      }
      const [r, g, b] = parseHex(color);
      out[k] = r;
      out[k + 1] = g;
      out[k + 2] = b;
      out[k + 3] = 255;
    }
  }
  return out;
}

export function legendFor(kind: LayerKind): LegendEntry[] {
  if (kind === "class") return CLASS_LEGEND;
  if (kind === "cover") {
    return Object.entries(COVER_COLORS).map(([code, color]) => ({
      value: Number(code), color,
      label: ["water", "urban", "forest", "shrub", "agriculture",
              "bare"][Number(code)],
      tooltip: "",
    }));
  }
  return [
    { value: 0, color: rampColor(0), label: "low", tooltip: "" },
    { value: 0.5, color: rampColor(0.5), label: "mid", tooltip: "" },
    { value: 1, color: rampColor(1), label: "high", tooltip: "" },
  ];
}

/** Canvas pixel -> grid cell under uniform scaling. */
export function pixelToCell(px: number, py: number, canvasW: number,
                            canvasH: number, spec: GridSpec):
    { i: number; j: number } {
  const j = Math.min(spec.ncols - 1,
                     Math.max(0, Math.floor((px / canvasW) * spec.ncols)));
  const i = Math.min(spec.nrows - 1,
                     Math.max(0, Math.floor((py / canvasH) * spec.nrows)));
  return { i, j };
}

/** Planar coordinates of a cell center (row i from the top). */
export function cellCenter(i: number, j: number,
                           spec: GridSpec): { x: number; y: number } {
  return {
    x: spec.xll + (j + 0.5) * spec.cellsize,
    y: spec.yll + (spec.nrows - 1 - i + 0.5) * spec.cellsize,
  };
}

/** Popup lines for a clicked cell; values verbatim from the response. */
export function cellPopup(risk: RiskResponse): string[] {
  const lines = [
    `${risk.peril} @ (${risk.x.toFixed(0)}, ${risk.y.toFixed(0)})`,
    `scenario: ${risk.scenario}`,
    `score: ${risk.score}`,
    risk.class === null ? "class: n/a" : `class: ${risk.class}`,
  ];
  if (risk.class !== null) {
    const entry = CLASS_LEGEND.find((e) => e.value === risk.class);
    if (entry) lines.push(entry.tooltip);
  }
  return lines;
}

// --- DOM side ----------------------------------------------------------------

export function paintGrid(canvas: HTMLCanvasElement, values: number[][],
                          kind: LayerKind, nodata: number): void {
  const nrows = values.length;
  const ncols = values[0]?.length ?? 0;
  canvas.width = ncols;
  canvas.height = nrows;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const image = new ImageData(new Uint8ClampedArray(
    gridToPixels(values, kind, nodata)), ncols, nrows);
  ctx.putImageData(image, 0, 0);
}

export function renderLegend(el: HTMLElement, entries: LegendEntry[]): void {
  el.innerHTML = "";
  for (const entry of entries) {
    const item = document.createElement("span");
    item.className = "legend-item";
    item.title = entry.tooltip;
    const swatch = document.createElement("span");
    swatch.className = "legend-swatch";
    swatch.style.backgroundColor = entry.color;
    item.append(swatch, document.createTextNode(entry.label));
    el.appendChild(item);
  }
}
