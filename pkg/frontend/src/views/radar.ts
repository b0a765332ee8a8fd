// Subgroup radar: one polygon per run over a canonical group order shared
// across runs and environments. IN polygons are solid, OUT dashed; a run
// with no OUT data gets an explicit "OUT absent" annotation, and undefined
// axis values become center-anchored n/a markers rather than zeros.

import { EnvPayload, StabilityPayload } from "../api";
import { el, runColor, svg } from "../format";

const SIZE = 320;
const R = 110;
const CX = SIZE / 2;
const CY = SIZE / 2;

export interface RadarEntry {
  run: string;
  colorIndex: number;
  stability: StabilityPayload;
}

function pickInEnv(entry: RadarEntry): EnvPayload | null {
  for (const name of ["in_test", "in_val", "in_train"]) {
    const env = entry.stability.envs[name];
    if (env?.present) return env;
  }
  return null;
}

function vertex(index: number, count: number, radius: number): [number, number] {
  const angle = (2 * Math.PI * index) / count - Math.PI / 2;
  return [CX + radius * Math.cos(angle), CY + radius * Math.sin(angle)];
}

function polygonPoints(values: (number | null)[], order: string[]): string {
  return values
    .map((value, i) => vertex(i, order.length, value === null ? 0 : R * Math.max(0, Math.min(1, value))))
    .map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`)
    .join(" ");
}

export function renderRadar(container: HTMLElement, entries: RadarEntry[], metric: string): void {
  container.replaceChildren();
  const usable = entries.filter((entry) => entry.stability.group_order.length >= 3);
  if (usable.length === 0) {
    container.appendChild(
      el("div", "empty-state", "Radar needs at least 3 subgroups; pick more axes or runs."),
    );
    return;
  }
  const order = usable[0].stability.group_order;
  const root = svg("svg", { viewBox: `0 0 ${SIZE} ${SIZE}`, width: "100%", class: "radar-svg" });

  for (const frac of [0.25, 0.5, 0.75, 1.0]) {
    const ring = order.map((_, i) => vertex(i, order.length, R * frac));
    root.appendChild(svg("polygon", {
      points: ring.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" "),
      class: "radar-ring",
    }));
  }
  order.forEach((label, i) => {
    const [x, y] = vertex(i, order.length, R + 14);
    const text = svg("text", {
      x, y, class: "radar-label", "text-anchor": "middle", "data-axis": label,
    });
    text.textContent = label;
    root.appendChild(text);
  });

  const notes = el("div", "radar-notes");
  for (const entry of usable) {
    if (entry.stability.group_order.join("|") !== order.join("|")) continue; // incomparable axes
    const color = runColor(entry.colorIndex);
    const inEnv = pickInEnv(entry);
    if (inEnv?.radar) {
      root.appendChild(svg("polygon", {
        points: polygonPoints(inEnv.radar, order),
        class: "radar-poly",
        stroke: color,
        fill: color,
        "fill-opacity": 0.12,
        "data-run": entry.run,
        "data-env": "in",
      }));
      inEnv.radar.forEach((value, i) => {
        if (value === null) {
          const [x, y] = vertex(i, order.length, 8);
          const na = svg("text", { x, y, class: "na-badge radar-na", "data-run": entry.run });
          na.textContent = "n/a";
          root.appendChild(na);
        }
      });
    }
    const out = entry.stability.envs["out"];
    if (out?.present && out.radar) {
      root.appendChild(svg("polygon", {
        points: polygonPoints(out.radar, order),
        class: "radar-poly radar-out",
        stroke: color,
        fill: "none",
        "stroke-dasharray": "4 3",
        "data-run": entry.run,
        "data-env": "out",
      }));
    } else {
      notes.appendChild(el("span", "env-absent", `${entry.run}: OUT absent`));
    }
  }

  container.appendChild(el("div", "chart-title", `subgroup ${metric} (solid IN, dashed OUT)`));
  container.appendChild(root);
  container.appendChild(notes);
}
