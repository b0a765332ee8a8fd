// What-if panel: one threshold slider per subgroup. Slider moves write the
// threshold map into the shared store; the panel issues /api/whatif with
// default-valued entries dropped (mirror of the server rule), renders the
// returned report verbatim, and accumulates an accuracy-vs-DP-gap frontier
// point per distinct response. Reset restores every slider to the default,
// which reproduces the baseline fairness report byte-for-byte.

import { ApiClient, FairnessPayload, GroupPayload, normalizeThresholds } from "../api";
import { el, fmt, metricCell, svg } from "../format";
import { Store } from "../state";

const METRIC_COLUMNS: (keyof GroupPayload)[] = [
  "positive_rate",
  "accuracy",
  "precision",
  "recall",
  "tpr",
  "fpr",
  "auc",
  "ap",
];

export class WhatifPanel {
  baselineRaw = "";
  lastRaw = "";
  frontier: { accuracy: number | null; dpGap: number | null }[] = [];

  private run = "";
  private sliderBox: HTMLElement;
  private reportBox: HTMLElement;
  private frontierBox: HTMLElement;
  private groups: string[] = [];

  constructor(
    container: HTMLElement,
    private store: Store,
    private api: ApiClient,
  ) {
    container.replaceChildren();
    this.sliderBox = el("div", "whatif-sliders");
    this.reportBox = el("div", "whatif-report");
    this.frontierBox = el("div", "whatif-frontier");
    const header = el("div", "panel-header");
    header.appendChild(el("span", "panel-title", "what-if thresholds"));
    const reset = el("button", "reset-button", "reset");
    reset.addEventListener("click", () => this.reset());
    header.appendChild(reset);
    container.append(header, this.sliderBox, this.reportBox, this.frontierBox);

    this.store.subscribe((state, changed) => {
      if (changed.has("thresholds")) {
        void this.refresh(state.thresholds);
      }
    });
  }

  async load(run: string, axes: string[]): Promise<void> {
    this.run = run;
    const state = this.store.get();
    const result = await this.api.fairness({
      run,
      axes,
      metric: state.metric,
      threshold: state.defaultThreshold,
    });
    if (!result) return;
    this.baselineRaw = result.raw;
    this.lastRaw = result.raw;
    this.frontier = [];
    if (!result.ok) {
      this.reportBox.replaceChildren(el("div", "error-note", result.raw));
      return;
    }
    this.groups = result.body.groups.map((g) => g.group);
    this.renderSliders();
    this.renderReport(result.body);
    this.recordFrontier(result.body);
  }

  private renderSliders(): void {
    this.sliderBox.replaceChildren();
    const state = this.store.get();
    for (const group of this.groups) {
      const row = el("label", "slider-row");
      row.appendChild(el("span", "slider-label", group));
      const slider = el("input") as HTMLInputElement;
      slider.type = "range";
      slider.min = "0";
      slider.max = "1";
      slider.step = "0.01";
      slider.value = String(state.thresholds[group] ?? state.defaultThreshold);
      slider.dataset.group = group;
      slider.addEventListener("input", () => {
        const thresholds = { ...this.store.get().thresholds, [group]: Number(slider.value) };
        this.store.update({ thresholds });
      });
      row.appendChild(slider);
      const value = el("span", "slider-value", slider.value);
      slider.addEventListener("input", () => (value.textContent = slider.value));
      row.appendChild(value);
      this.sliderBox.appendChild(row);
    }
  }

  private reset(): void {
    for (const slider of this.sliderBox.querySelectorAll<HTMLInputElement>("input[type=range]")) {
      slider.value = String(this.store.get().defaultThreshold);
      const value = slider.parentElement?.querySelector(".slider-value");
      if (value) value.textContent = slider.value;
    }
    this.store.update({ thresholds: {} });
  }

  private async refresh(thresholds: Record<string, number>): Promise<void> {
    if (!this.run) return;
    const state = this.store.get();
    const result = await this.api.whatif({
      run: this.run,
      axes: state.axes,
      thresholds: normalizeThresholds(thresholds, state.defaultThreshold),
      metric: state.metric,
      threshold: state.defaultThreshold,
    });
    if (!result) return; // superseded by a newer slider position
    this.lastRaw = result.raw;
    if (!result.ok) {
      this.reportBox.replaceChildren(el("div", "error-note", result.raw));
      return;
    }
    this.renderReport(result.body);
    this.recordFrontier(result.body);
  }

  private renderReport(report: FairnessPayload): void {
    this.reportBox.replaceChildren();
    const table = el("table", "metrics-table");
    const head = el("tr");
    head.appendChild(el("th", "", "group"));
    head.appendChild(el("th", "", "n"));
    for (const column of METRIC_COLUMNS) head.appendChild(el("th", "", column));
    table.appendChild(head);
    for (const group of [...report.groups, report.overall]) {
      const row = el("tr", group.low_support ? "low-support" : "");
      row.dataset.group = group.group;
      row.appendChild(el("td", "group-label", group.group));
      row.appendChild(el("td", "", String(group.n)));
      for (const column of METRIC_COLUMNS) {
        const cell = el("td");
        cell.appendChild(metricCell(group[column] as number | null));
        row.appendChild(cell);
      }
      table.appendChild(row);
    }
    this.reportBox.appendChild(table);

    const disparity = el("div", "disparity-line");
    if (report.disparity) {
      const d = report.disparity;
      disparity.append(
        badge(`${d.metric} gap`, d.metric_gap),
        badge("DP gap", d.dp_gap),
        badge("TPR gap", d.tpr_gap),
        badge("FPR gap", d.fpr_gap),
        badge("EO diff", d.eo_diff),
        el("span", "worst-best", `worst ${d.worst_group ?? "n/a"} · best ${d.best_group ?? "n/a"}`),
      );
    } else {
      disparity.appendChild(el("span", "error-note", report.note ?? "no disparity summary"));
    }
    this.reportBox.appendChild(disparity);
  }

  private recordFrontier(report: FairnessPayload): void {
    this.frontier.push({
      accuracy: report.overall.accuracy,
      dpGap: report.disparity ? report.disparity.dp_gap : null,
    });
    this.renderFrontier();
  }

  private renderFrontier(): void {
    this.frontierBox.replaceChildren();
    this.frontierBox.appendChild(el("div", "chart-title", "visited frontier: accuracy vs DP gap"));
    const W = 260;
    const H = 160;
    const root = svg("svg", { viewBox: `0 0 ${W} ${H}`, width: "100%", class: "frontier-svg" });
    const points = this.frontier.filter((p) => p.accuracy !== null && p.dpGap !== null);
    const last = points[points.length - 1];
    for (const point of points) {
      root.appendChild(svg("circle", {
        cx: 10 + (point.dpGap as number) * (W - 20),
        cy: H - 10 - (point.accuracy as number) * (H - 20),
        r: point === last ? 5 : 3,
        class: point === last ? "frontier-dot current" : "frontier-dot",
      }));
    }
    this.frontierBox.appendChild(root);
    this.frontierBox.appendChild(
      el("div", "frontier-count", `${points.length} operating points visited`),
    );
  }
}

function badge(label: string, value: number | null): HTMLElement {
  const node = el("span", "gap-badge");
  node.appendChild(el("span", "gap-label", label));
  node.appendChild(el("span", value === null ? "na-badge" : "gap-value", fmt(value)));
  return node;
}
