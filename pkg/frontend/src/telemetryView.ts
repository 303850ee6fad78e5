/** Usage heatmap: 6 roles x 5 categories, darker cells mean heavier use. */

import { HeatmapResponse } from "./api.js";
import { heatmapShade } from "./colors.js";

export interface HeatmapCell {
  role: string;
  category: string;
  value: number;
  shade: string;
}

export function heatmapCells(body: HeatmapResponse): HeatmapCell[][] {
  return body.matrix.map((row, r) =>
    row.map((value, c) => ({
      role: body.roles[r],
      category: body.categories[c],
      value,
      shade: heatmapShade(value),
    })));
}

export function renderHeatmap(el: HTMLElement, body: HeatmapResponse): void {
  const rows = heatmapCells(body);
  const table = document.createElement("table");
  table.className = "heatmap";
  const header = document.createElement("tr");
  header.appendChild(document.createElement("th"));
  for (const category of body.categories) {
    const th = document.createElement("th");
    th.textContent = category.replace("_", " ");
    header.appendChild(th);
  }
  table.appendChild(header);
  for (const row of rows) {
    const tr = document.createElement("tr");
    const label = document.createElement("th");
    label.textContent = row[0].role.replace("_", " ");
    tr.appendChild(label);
    for (const cell of row) {
      const td = document.createElement("td");
      td.style.backgroundColor = cell.shade;
      td.title = `${cell.role} / ${cell.category}: ${cell.value.toFixed(2)}`;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  el.innerHTML = "";
  el.appendChild(table);
}
