// Correlation heatmap. Undefined cells render with a hatch pattern (never
// as zero); every cell tooltip carries the coefficient and pairwise support;
// clicking a cell pushes its two columns into the shared selection so the
// timeline view picks them up.

import { CorrelationPayload } from "../api";
import { el, svg } from "../format";

const CELL = 26;
const LABEL_SPACE = 150;

function cellColor(value: number): string {
  const alpha = Math.min(1, Math.abs(value));
  return value >= 0
    ? `rgba(190, 54, 36, ${(0.15 + 0.85 * alpha).toFixed(3)})`
    : `rgba(42, 94, 183, ${(0.15 + 0.85 * alpha).toFixed(3)})`;
}

export function renderHeatmap(
  container: HTMLElement,
  matrix: CorrelationPayload,
  onSelect: (columnA: string, columnB: string) => void,
): void {
  container.replaceChildren();
  const n = matrix.labels.length;
  if (n === 0) {
    container.appendChild(el("div", "empty-state", "Select at least two columns to correlate."));
    return;
  }
  const size = LABEL_SPACE + n * CELL;
  const root = svg("svg", { viewBox: `0 0 ${size} ${size}`, width: "100%", class: "heatmap-svg" });

  const defs = svg("defs");
  const pattern = svg("pattern", {
    id: "hatch",
    width: 6,
    height: 6,
    patternUnits: "userSpaceOnUse",
    patternTransform: "rotate(45)",
  });
  pattern.appendChild(svg("rect", { width: 6, height: 6, fill: "#f2f2f2" }));
  pattern.appendChild(svg("line", { x1: 0, y1: 0, x2: 0, y2: 6, stroke: "#999", "stroke-width": 2 }));
  defs.appendChild(pattern);
  root.appendChild(defs);

  for (let i = 0; i < n; i++) {
    const rowLabel = svg("text", {
      x: LABEL_SPACE - 6,
      y: LABEL_SPACE + i * CELL + CELL / 2 + 4,
      "text-anchor": "end",
      class: "heatmap-label",
    });
    rowLabel.textContent = matrix.labels[i];
    root.appendChild(rowLabel);
    const colLabel = svg("text", {
      x: LABEL_SPACE + i * CELL + CELL / 2,
      y: LABEL_SPACE - 6,
      class: "heatmap-label",
      transform: `rotate(-60 ${LABEL_SPACE + i * CELL + CELL / 2} ${LABEL_SPACE - 6})`,
    });
    colLabel.textContent = matrix.labels[i];
    root.appendChild(colLabel);
  }

  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const value = matrix.values[i][j];
      const support = matrix.support[i][j];
      const defined = value !== null && value !== undefined;
      const rect = svg("rect", {
        x: LABEL_SPACE + j * CELL + 1,
        y: LABEL_SPACE + i * CELL + 1,
        width: CELL - 2,
        height: CELL - 2,
        class: "heatmap-cell",
        fill: defined ? cellColor(value) : "url(#hatch)",
        "data-row": i,
        "data-col": j,
        "data-undefined": defined ? "false" : "true",
      });
      const tooltip = svg("title");
      tooltip.textContent = defined
        ? `${matrix.labels[i]} × ${matrix.labels[j]}: r=${value.toFixed(4)}, n=${support}`
        : `${matrix.labels[i]} × ${matrix.labels[j]}: undefined, n=${support}`;
      rect.appendChild(tooltip);
      rect.addEventListener("click", () => onSelect(matrix.labels[i], matrix.labels[j]));
      root.appendChild(rect);
    }
  }
  container.appendChild(root);
}
