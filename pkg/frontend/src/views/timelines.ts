// Synchronized line charts. All charts share one x-domain on the step axis
// and render their brush overlay from the same SelectionState, so a brush
// gesture in any chart highlights the identical step range everywhere.

import { Store } from "../state";
import { el, runColor, svg } from "../format";

export const CHART_W = 600;
export const CHART_H = 140;
const PAD_L = 42;
const PAD_B = 18;
const PAD_T = 8;

export interface TraceData {
  run: string;
  colorIndex: number;
  points: [number, number][]; // (step, value)
}

export interface ChartBundle {
  title: string;
  traces: TraceData[];
  stepsPerUnit?: number; // e.g. steps per epoch for epoch-indexed series
}

export class TimelinesView {
  private bundles: ChartBundle[] = [];
  private domain: [number, number] = [0, 1];

  constructor(
    private container: HTMLElement,
    private store: Store,
  ) {
    this.store.subscribe((_state, changed) => {
      if (changed.has("brush")) this.renderBrushes();
    });
  }

  setData(bundles: ChartBundle[]): void {
    this.bundles = bundles.filter((b) => b.traces.some((t) => t.points.length > 0));
    let lo = Infinity;
    let hi = -Infinity;
    for (const bundle of this.bundles) {
      const scale = bundle.stepsPerUnit ?? 1;
      for (const trace of bundle.traces) {
        for (const [x] of trace.points) {
          lo = Math.min(lo, x * scale);
          hi = Math.max(hi, x * scale);
        }
      }
    }
    this.domain = lo < hi ? [lo, hi] : [0, 1];
    this.render();
  }

  private xPixel(step: number): number {
    const [lo, hi] = this.domain;
    return PAD_L + ((step - lo) / (hi - lo)) * (CHART_W - PAD_L);
  }

  private stepAt(px: number): number {
    const [lo, hi] = this.domain;
    const frac = Math.min(1, Math.max(0, (px - PAD_L) / (CHART_W - PAD_L)));
    return Math.round(lo + frac * (hi - lo));
  }

  private render(): void {
    this.container.replaceChildren();
    if (this.bundles.length === 0) {
      this.container.appendChild(el("div", "empty-state", "No runs or metrics selected."));
      return;
    }
    const legendRuns = new Map<string, number>();
    for (const bundle of this.bundles) {
      for (const trace of bundle.traces) legendRuns.set(trace.run, trace.colorIndex);
    }
    const legend = el("div", "legend");
    for (const [run, colorIndex] of legendRuns) {
      const item = el("span", "legend-item", run);
      item.style.borderColor = runColor(colorIndex);
      legend.appendChild(item);
    }
    this.container.appendChild(legend);

    for (const bundle of this.bundles) {
      this.container.appendChild(this.renderChart(bundle));
    }
    this.renderBrushes();
  }

  private renderChart(bundle: ChartBundle): HTMLElement {
    const panel = el("div", "chart");
    panel.dataset.tag = bundle.title;
    panel.appendChild(el("div", "chart-title", bundle.title));

    const root = svg("svg", {
      viewBox: `0 0 ${CHART_W} ${CHART_H}`,
      width: "100%",
      class: "chart-svg",
    });
    let lo = Infinity;
    let hi = -Infinity;
    for (const trace of bundle.traces) {
      for (const [, y] of trace.points) {
        lo = Math.min(lo, y);
        hi = Math.max(hi, y);
      }
    }
    if (!(lo < hi)) {
      hi = lo + 1 || 1;
      lo = lo - 1 || 0;
    }
    const yPixel = (v: number) => PAD_T + (1 - (v - lo) / (hi - lo)) * (CHART_H - PAD_T - PAD_B);
    const scale = bundle.stepsPerUnit ?? 1;

    root.appendChild(svg("line", {
      x1: PAD_L, y1: CHART_H - PAD_B, x2: CHART_W, y2: CHART_H - PAD_B, class: "axis",
    }));
    root.appendChild(svg("line", { x1: PAD_L, y1: PAD_T, x2: PAD_L, y2: CHART_H - PAD_B, class: "axis" }));
    const yTop = svg("text", { x: 2, y: PAD_T + 10, class: "tick" });
    yTop.textContent = hi.toPrecision(3);
    const yBottom = svg("text", { x: 2, y: CHART_H - PAD_B, class: "tick" });
    yBottom.textContent = lo.toPrecision(3);
    root.append(yTop, yBottom);

    for (const trace of bundle.traces) {
      const path = trace.points
        .map(([x, y]) => `${this.xPixel(x * scale).toFixed(1)},${yPixel(y).toFixed(1)}`)
        .join(" ");
      root.appendChild(svg("polyline", {
        points: path,
        fill: "none",
        stroke: runColor(trace.colorIndex),
        "stroke-width": 1.4,
        "data-run": trace.run,
      }));
    }

    const brushRect = svg("rect", {
      class: "brush-rect",
      y: PAD_T,
      height: CHART_H - PAD_T - PAD_B,
      x: 0,
      width: 0,
      visibility: "hidden",
    });
    root.appendChild(brushRect);

    const overlay = svg("rect", {
      class: "brush-overlay",
      x: PAD_L,
      y: PAD_T,
      width: CHART_W - PAD_L,
      height: CHART_H - PAD_T - PAD_B,
      fill: "transparent",
    });
    this.attachBrush(overlay, root);
    root.appendChild(overlay);

    panel.appendChild(root);
    return panel;
  }

  private logicalX(event: MouseEvent, root: SVGSVGElement): number {
    const rect = root.getBoundingClientRect();
    const width = rect.width || CHART_W;
    return ((event.clientX - rect.left) * CHART_W) / width;
  }

  private attachBrush(overlay: SVGRectElement, root: SVGSVGElement): void {
    let anchor: number | null = null;
    overlay.addEventListener("mousedown", (event) => {
      anchor = this.stepAt(this.logicalX(event, root));
    });
    overlay.addEventListener("mousemove", (event) => {
      if (anchor === null) return;
      const current = this.stepAt(this.logicalX(event, root));
      this.store.update({ brush: { from: Math.min(anchor, current), to: Math.max(anchor, current) } });
    });
    overlay.addEventListener("mouseup", (event) => {
      if (anchor === null) return;
      const current = this.stepAt(this.logicalX(event, root));
      if (current === anchor) {
        this.store.update({ brush: null }); // click clears the brush
      } else {
        this.store.update({ brush: { from: Math.min(anchor, current), to: Math.max(anchor, current) } });
      }
      anchor = null;
    });
  }

  private renderBrushes(): void {
    const brush = this.store.get().brush;
    for (const rect of this.container.querySelectorAll<SVGRectElement>(".brush-rect")) {
      if (!brush) {
        rect.setAttribute("visibility", "hidden");
        rect.removeAttribute("data-from");
        rect.removeAttribute("data-to");
        continue;
      }
      const x0 = this.xPixel(brush.from);
      const x1 = this.xPixel(brush.to);
      rect.setAttribute("visibility", "visible");
      rect.setAttribute("x", String(Math.min(x0, x1)));
      rect.setAttribute("width", String(Math.abs(x1 - x0)));
      rect.setAttribute("data-from", String(brush.from));
      rect.setAttribute("data-to", String(brush.to));
    }
  }
}
