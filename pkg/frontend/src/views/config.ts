// Side-by-side configuration deltas for the selected runs. Only keys whose
// values differ appear (highlighted); identical configs collapse to an
// explicit notice, and a run without a config.json shows "unknown".

import { RunInfo } from "../api";
import { el } from "../format";

export function renderConfigPane(container: HTMLElement, runs: RunInfo[]): void {
  container.replaceChildren();
  container.appendChild(el("div", "panel-title", "configuration deltas"));
  if (runs.length === 0) {
    container.appendChild(el("div", "empty-state", "No runs selected."));
    return;
  }
  const keys = [...new Set(runs.flatMap((run) => Object.keys(run.config_delta)))].sort();
  if (keys.length === 0) {
    container.appendChild(el("div", "no-deltas", "no deltas"));
    return;
  }
  const table = el("table", "config-table");
  const head = el("tr");
  head.appendChild(el("th", "", "key"));
  for (const run of runs) head.appendChild(el("th", "", run.run_id));
  table.appendChild(head);
  for (const key of keys) {
    const row = el("tr", "delta-key");
    row.dataset.key = key;
    row.appendChild(el("td", "config-key", key));
    for (const run of runs) {
      const hasConfig = Object.keys(run.config).length > 0;
      const value = run.config_delta[key] ?? run.config[key];
      row.appendChild(
        el("td", value == null ? "config-unknown" : "config-value", value == null || !hasConfig ? "unknown" : value),
      );
    }
    table.appendChild(row);
  }
  container.appendChild(table);
}
