// Linked-view acceptance: brushing a step range in one timeline highlights
// the identical range in every timeline, because all charts render their
// brush from the one SelectionState.

import { beforeEach, describe, expect, it } from "vitest";

import { Store } from "../src/state";
import { ChartBundle, TimelinesView } from "../src/views/timelines";

function bundles(): ChartBundle[] {
  const points: [number, number][] = Array.from({ length: 101 }, (_, i) => [i, Math.sin(i / 10)]);
  return [
    { title: "train/loss", traces: [{ run: "baseline", colorIndex: 0, points }] },
    { title: "fairness/accuracy_gap", traces: [{ run: "baseline", colorIndex: 0, points }] },
    { title: "val/accuracy", traces: [{ run: "baseline", colorIndex: 0, points }] },
  ];
}

function mouse(target: Element, type: string, clientX: number): void {
  target.dispatchEvent(new MouseEvent(type, { clientX, bubbles: true }));
}

describe("timeline brushing", () => {
  let container: HTMLElement;
  let store: Store;

  beforeEach(() => {
    container = document.createElement("div");
    document.body.replaceChildren(container);
    store = new Store();
    const view = new TimelinesView(container, store);
    view.setData(bundles());
  });

  it("highlights the identical step range in all timelines", () => {
    const overlays = container.querySelectorAll<SVGRectElement>(".brush-overlay");
    expect(overlays.length).toBe(3);
    mouse(overlays[0], "mousedown", 100);
    mouse(overlays[0], "mousemove", 300);
    mouse(overlays[0], "mouseup", 300);

    const state = store.get();
    expect(state.brush).not.toBeNull();
    const rects = [...container.querySelectorAll<SVGRectElement>(".brush-rect")];
    expect(rects.length).toBe(3);
    const ranges = rects.map((r) => [r.getAttribute("data-from"), r.getAttribute("data-to")]);
    expect(new Set(ranges.map((r) => r.join(".."))).size).toBe(1);
    expect(ranges[0]).toEqual([String(state.brush!.from), String(state.brush!.to)]);
    for (const rect of rects) {
      expect(rect.getAttribute("visibility")).toBe("visible");
      expect(rect.getAttribute("x")).toBe(rects[0].getAttribute("x"));
      expect(rect.getAttribute("width")).toBe(rects[0].getAttribute("width"));
    }
  });

  it("brushing a different chart produces the same linked highlight", () => {
    const overlays = container.querySelectorAll<SVGRectElement>(".brush-overlay");
    mouse(overlays[2], "mousedown", 150);
    mouse(overlays[2], "mousemove", 420);
    mouse(overlays[2], "mouseup", 420);
    const rects = [...container.querySelectorAll<SVGRectElement>(".brush-rect")];
    const ranges = new Set(rects.map((r) => `${r.dataset.from}..${r.dataset.to}`));
    expect(ranges.size).toBe(1);
  });

  it("a click without dragging clears the brush everywhere", () => {
    const overlays = container.querySelectorAll<SVGRectElement>(".brush-overlay");
    mouse(overlays[0], "mousedown", 100);
    mouse(overlays[0], "mousemove", 300);
    mouse(overlays[0], "mouseup", 300);
    expect(store.get().brush).not.toBeNull();

    mouse(overlays[1], "mousedown", 200);
    mouse(overlays[1], "mouseup", 200);
    expect(store.get().brush).toBeNull();
    for (const rect of container.querySelectorAll<SVGRectElement>(".brush-rect")) {
      expect(rect.getAttribute("visibility")).toBe("hidden");
    }
  });

  it("renders an empty-state placeholder without data", () => {
    const view = new TimelinesView(container, store);
    view.setData([]);
    expect(container.querySelector(".empty-state")).not.toBeNull();
  });

  it("two runs draw two traces with a shared legend", () => {
    const points: [number, number][] = [[0, 1], [50, 2], [100, 3]];
    const view = new TimelinesView(container, store);
    view.setData([
      {
        title: "train/loss",
        traces: [
          { run: "lr_0.01", colorIndex: 0, points },
          { run: "lr_0.001", colorIndex: 1, points },
        ],
      },
    ]);
    expect(container.querySelectorAll("polyline").length).toBe(2);
    const legend = [...container.querySelectorAll(".legend-item")].map((n) => n.textContent);
    expect(legend).toEqual(["lr_0.01", "lr_0.001"]);
  });
});
