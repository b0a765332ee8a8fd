// Dashboard shell: loads the catalog, wires every view to the shared
// store, and polls the server on its own rescan cadence. No interaction
// reloads the page; all data flows through the typed API client.

import { ApiClient, RunInfo, StabilityPayload } from "./api";
import { el } from "./format";
import { Store } from "./state";
import { renderConfigPane } from "./views/config";
import { renderHeatmap } from "./views/heatmap";
import { RadarEntry, renderRadar } from "./views/radar";
import { ChartBundle, TimelinesView } from "./views/timelines";
import { WhatifPanel } from "./views/whatif";

const api = new ApiClient();
const store = new Store();

const app = document.querySelector<HTMLDivElement>("#app");

interface CatalogCache {
  version: number;
  runs: RunInfo[];
}

let catalog: CatalogCache = { version: -1, runs: [] };
let timelines: TimelinesView;
let whatif: WhatifPanel;
let panels: Record<string, HTMLElement> = {};

function runInfo(runId: string): RunInfo | undefined {
  return catalog.runs.find((r) => r.run_id === runId);
}

function buildLayout(root: HTMLElement): void {
  root.replaceChildren();
  const header = el("div", "topbar");
  header.appendChild(el("span", "brand", "fairboard"));
  panels = {
    controls: el("div", "panel controls"),
    timelines: el("div", "panel timelines"),
    heatmap: el("div", "panel heatmap"),
    gap: el("div", "panel gap-timeline"),
    radar: el("div", "panel radar"),
    whatif: el("div", "panel whatif"),
    config: el("div", "panel config"),
    status: el("div", "panel status"),
  };
  root.appendChild(header);
  const grid = el("div", "grid");
  for (const panel of Object.values(panels)) grid.appendChild(panel);
  root.appendChild(grid);

  timelines = new TimelinesView(panels.timelines, store);
  whatif = new WhatifPanel(panels.whatif, store, api);
}

function renderControls(): void {
  const box = panels.controls;
  box.replaceChildren();
  box.appendChild(el("div", "panel-title", "runs"));
  const state = store.get();
  const runList = el("div", "run-list");
  for (const run of catalog.runs) {
    const label = el("label", "run-toggle");
    const input = el("input") as HTMLInputElement;
    input.type = "checkbox";
    input.checked = state.runs.includes(run.run_id);
    input.addEventListener("change", () => {
      const runs = input.checked
        ? [...store.get().runs, run.run_id]
        : store.get().runs.filter((r) => r !== run.run_id);
      store.update({ runs });
    });
    label.append(input, el("span", "", run.run_id));
    runList.appendChild(label);
  }
  box.appendChild(runList);

  box.appendChild(el("div", "panel-title", "metrics"));
  const tagList = el("div", "tag-list");
  const availableTags = [...new Set(catalog.runs.filter((r) => state.runs.includes(r.run_id)).flatMap((r) => r.tags))].sort();
  for (const tag of availableTags) {
    const label = el("label", "tag-toggle");
    const input = el("input") as HTMLInputElement;
    input.type = "checkbox";
    input.checked = state.tags.includes(tag);
    input.addEventListener("change", () => {
      const tags = input.checked
        ? [...store.get().tags, tag]
        : store.get().tags.filter((t) => t !== tag);
      store.update({ tags });
    });
    label.append(input, el("span", "", tag));
    tagList.appendChild(label);
  }
  box.appendChild(tagList);

  box.appendChild(el("div", "panel-title", "slice axes"));
  const axisList = el("div", "axis-list");
  const attributes = [...new Set(catalog.runs.filter((r) => state.runs.includes(r.run_id)).flatMap((r) => Object.keys(r.attributes)))].sort();
  for (const axis of attributes) {
    const label = el("label", "axis-toggle");
    const input = el("input") as HTMLInputElement;
    input.type = "checkbox";
    input.checked = state.axes.includes(axis);
    input.addEventListener("change", () => {
      const axes = input.checked
        ? [...store.get().axes, axis]
        : store.get().axes.filter((a) => a !== axis);
      store.update({ axes, thresholds: {} });
    });
    label.append(input, el("span", "", axis));
    axisList.appendChild(label);
  }
  box.appendChild(axisList);

  const metricLabel = el("label", "metric-pick");
  metricLabel.appendChild(el("span", "", "metric"));
  const select = el("select") as HTMLSelectElement;
  for (const metric of ["accuracy", "positive_rate", "precision", "recall", "tpr", "fpr", "auc", "ap"]) {
    const option = el("option", "", metric) as HTMLOptionElement;
    option.value = metric;
    option.selected = metric === state.metric;
    select.appendChild(option);
  }
  select.addEventListener("change", () => store.update({ metric: select.value }));
  metricLabel.appendChild(select);
  box.appendChild(metricLabel);
}

async function refreshTimelines(): Promise<void> {
  const state = store.get();
  const bundles: ChartBundle[] = [];
  const gapBundle: ChartBundle = { title: `disparity: ${state.metric} gap`, traces: [] };
  let maxStep = 0;
  let maxEpoch = 0;

  for (const tag of state.tags) {
    const bundle: ChartBundle = { title: tag, traces: [] };
    await Promise.all(
      state.runs.map(async (run, index) => {
        const info = runInfo(run);
        if (!info || !info.tags.includes(tag)) return;
        const result = await api.scalars(run, tag);
        if (!result?.ok) return;
        const points = result.body.points.map(([step, , value]) => [step, value] as [number, number]);
        for (const [step] of points) maxStep = Math.max(maxStep, step);
        bundle.traces.push({ run, colorIndex: index, points });
      }),
    );
    bundle.traces.sort((a, b) => a.colorIndex - b.colorIndex);
    bundles.push(bundle);
  }

  if (state.axes.length > 0) {
    await Promise.all(
      state.runs.map(async (run, index) => {
        const info = runInfo(run);
        if (!info || info.n_predictions === 0) return;
        const result = await api.timeline(run, state.axes, state.metric);
        if (!result?.ok) return;
        const points = result.body.points
          .filter((p) => p.gap !== null)
          .map((p) => [p.epoch, p.gap as number] as [number, number]);
        for (const p of result.body.points) maxEpoch = Math.max(maxEpoch, p.epoch);
        gapBundle.traces.push({ run, colorIndex: index, points });
      }),
    );
  }
  if (gapBundle.traces.length > 0) {
    gapBundle.stepsPerUnit = maxEpoch > 0 && maxStep > 0 ? maxStep / maxEpoch : 1;
    bundles.push(gapBundle);
  }
  timelines.setData(bundles);
}

async function refreshHeatmap(): Promise<void> {
  const state = store.get();
  const columns = state.runs.flatMap((run) => {
    const info = runInfo(run);
    return state.tags.filter((tag) => info?.tags.includes(tag)).map((tag) => `${run}/${tag}`);
  });
  if (columns.length < 2) {
    panels.heatmap.replaceChildren(el("div", "empty-state", "Select two or more run metrics to correlate."));
    return;
  }
  const result = await api.correlation(columns);
  if (!result) return;
  if (!result.ok) {
    panels.heatmap.replaceChildren(el("div", "error-note", result.raw));
    return;
  }
  renderHeatmap(panels.heatmap, result.body, (a, b) => {
    // clicking a cell focuses the timeline view on that pair of columns
    const runs = [...new Set([a, b].map((c) => c.split("/")[0]))];
    const tags = [...new Set([a, b].map((c) => c.slice(c.indexOf("/") + 1)))];
    store.update({ runs, tags });
  });
}

async function refreshRadar(): Promise<void> {
  const state = store.get();
  if (state.axes.length === 0) {
    panels.radar.replaceChildren(el("div", "empty-state", "Pick slice axes to compare subgroups."));
    return;
  }
  const entries: RadarEntry[] = [];
  await Promise.all(
    state.runs.map(async (run, index) => {
      const info = runInfo(run);
      if (!info || info.n_predictions === 0) return;
      const result = await api.inout(run, state.axes, state.metric);
      if (result?.ok) entries.push({ run, colorIndex: index, stability: result.body as StabilityPayload });
    }),
  );
  entries.sort((a, b) => a.colorIndex - b.colorIndex);
  renderRadar(panels.radar, entries, state.metric);
}

async function refreshWhatif(): Promise<void> {
  const state = store.get();
  const target = state.runs.find((run) => (runInfo(run)?.n_predictions ?? 0) > 0);
  if (!target || state.axes.length === 0) {
    panels.whatif.querySelector(".whatif-report")?.replaceChildren(
      el("div", "empty-state", "Select a run with predictions and at least one axis."),
    );
    return;
  }
  await whatif.load(target, state.axes);
}

function refreshConfig(): void {
  const runs = store.get().runs.map(runInfo).filter((r): r is RunInfo => Boolean(r));
  renderConfigPane(panels.config, runs);
}

function renderStatus(health: { catalog_version: number; runs: number; rescan_secs: number }): void {
  panels.status.replaceChildren(
    el("div", "panel-title", "server"),
    el("div", "status-line", `catalog v${health.catalog_version} · ${health.runs} runs · rescan ${health.rescan_secs}s`),
  );
}

async function loadCatalog(): Promise<void> {
  const result = await api.runs();
  if (!result?.ok) return;
  catalog = { version: result.body.catalog_version, runs: result.body.runs };
  const state = store.get();
  if (state.runs.length === 0 && catalog.runs.length > 0) {
    const withPredictions = catalog.runs.filter((r) => r.n_predictions > 0).map((r) => r.run_id);
    const defaults = withPredictions.slice(0, 2);
    const firstAxes = Object.keys(catalog.runs.find((r) => r.n_predictions > 0)?.attributes ?? {});
    store.update({
      runs: defaults.length ? defaults : [catalog.runs[0].run_id],
      tags: catalog.runs[0].tags.slice(0, 2),
      axes: firstAxes.slice(0, 2),
    });
  }
  renderControls();
  await refreshAll();
}

async function refreshAll(): Promise<void> {
  refreshConfig();
  await Promise.all([refreshTimelines(), refreshHeatmap(), refreshRadar(), refreshWhatif()]);
}

async function poll(): Promise<void> {
  const health = await api.health();
  if (!health?.ok) return;
  renderStatus(health.body);
  if (health.body.catalog_version !== catalog.version) {
    await loadCatalog(); // live ingest: new data appeared, refetch views
  }
  window.setTimeout(() => void poll(), Math.max(1000, health.body.rescan_secs * 1000));
}

store.subscribe((_state, changed) => {
  if (changed.has("runs") || changed.has("tags") || changed.has("axes") || changed.has("metric")) {
    renderControls();
    void refreshAll();
  }
});

if (app) {
  buildLayout(app);
  void loadCatalog().then(() => void poll());
}

export { buildLayout, store, api };
