// REST client. Two concurrency rules from the dashboard contract:
//  - identical requests in flight are deduplicated onto one fetch;
//  - each logical view ("kind") tags requests with a sequence number and
//    discards responses superseded by a newer selection.
// Raw response text is kept alongside the parsed body so callers can do
// byte-level comparisons (the what-if reset check relies on it).

export interface ApiResult<T> {
  ok: boolean;
  status: number;
  raw: string;
  body: T;
}

export interface RunInfo {
  run_id: string;
  tags: string[];
  config: Record<string, string>;
  config_delta: Record<string, string | null>;
  health: Record<string, unknown>;
  n_predictions: number;
  epochs: number[];
  attributes: Record<string, string[]>;
}

export interface ScalarSeriesPayload {
  run: string;
  tag: string;
  original_length: number;
  mode: string;
  points: [number, number, number][];
}

export interface GroupPayload {
  group: string;
  n: number;
  counts: { tp: number; fp: number; tn: number; fn: number };
  positive_rate: number | null;
  accuracy: number | null;
  precision: number | null;
  recall: number | null;
  tpr: number | null;
  fpr: number | null;
  auc: number | null;
  ap: number | null;
  low_support: boolean;
}

export interface DisparityPayload {
  metric: string;
  metric_gap: number | null;
  dp_gap: number | null;
  tpr_gap: number | null;
  fpr_gap: number | null;
  eo_diff: number | null;
  worst_group: string | null;
  best_group: string | null;
  low_support_groups: string[];
}

export interface FairnessPayload {
  run: string;
  axes: string[];
  task: string;
  metric: string;
  epoch: number | null;
  thresholds: Record<string, number>;
  groups: GroupPayload[];
  overall: GroupPayload;
  disparity: DisparityPayload | null;
  note: string | null;
}

export interface CorrelationPayload {
  labels: string[];
  values: (number | null)[][];
  support: number[][];
}

export interface TimelinePointPayload {
  epoch: number;
  gap: number | null;
  values: Record<string, number | null>;
  note: string | null;
}

export interface TimelinePayload {
  run: string;
  metric: string;
  axes: string[];
  points: TimelinePointPayload[];
}

export interface EnvPayload {
  present: boolean;
  epoch?: number;
  groups?: GroupPayload[];
  missing_groups?: string[];
  radar?: (number | null)[];
}

export interface StabilityPayload {
  run: string;
  axes: string[];
  metric: string;
  group_order: string[];
  envs: Record<string, EnvPayload>;
}

export interface HealthPayload {
  status: string;
  catalog_version: number;
  runs: number;
  rescan_secs: number;
}

export function normalizeThresholds(
  thresholds: Record<string, number>,
  defaultThreshold: number,
): Record<string, number> {
  // mirror of the server rule: a slider at the default is a no-op, so a
  // reset request is byte-identical to the plain fairness request
  const out: Record<string, number> = {};
  for (const key of Object.keys(thresholds).sort()) {
    if (thresholds[key] !== defaultThreshold) out[key] = thresholds[key];
  }
  return out;
}

export class ApiClient {
  private inflight = new Map<string, Promise<ApiResult<unknown>>>();
  private latest = new Map<string, number>();
  private counter = 0;

  constructor(
    private base = "",
    private fetcher: typeof fetch = (...args) => fetch(...args),
  ) {}

  /** Returns null when a newer request of the same kind superseded this one. */
  async request<T>(kind: string, path: string, init?: RequestInit): Promise<ApiResult<T> | null> {
    const key = `${path}|${String(init?.body ?? "")}`;
    let promise = this.inflight.get(key);
    if (!promise) {
      promise = this.fetcher(this.base + path, init)
        .then(async (response) => {
          const raw = await response.text();
          return {
            ok: response.ok,
            status: response.status,
            raw,
            body: raw ? (JSON.parse(raw) as unknown) : null,
          };
        })
        .finally(() => this.inflight.delete(key));
      this.inflight.set(key, promise);
    }
    const seq = ++this.counter;
    this.latest.set(kind, seq);
    const result = (await promise) as ApiResult<T>;
    if (this.latest.get(kind) !== seq) return null;
    return result;
  }

  private post<T>(kind: string, path: string, body: unknown): Promise<ApiResult<T> | null> {
    return this.request<T>(kind, path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<ApiResult<HealthPayload> | null> {
    return this.request("health", "/api/health");
  }

  runs(): Promise<ApiResult<{ catalog_version: number; runs: RunInfo[] }> | null> {
    return this.request("runs", "/api/runs");
  }

  scalars(run: string, tag: string, maxPoints = 1000): Promise<ApiResult<ScalarSeriesPayload> | null> {
    const params = new URLSearchParams({ run, tag, max_points: String(maxPoints) });
    return this.request("scalars:" + run + "/" + tag, `/api/scalars?${params}`);
  }

  fairness(body: {
    run: string;
    axes: string[];
    metric?: string;
    threshold?: number;
    epoch?: number | null;
  }): Promise<ApiResult<FairnessPayload> | null> {
    return this.post("fairness", "/api/fairness", body);
  }

  whatif(body: {
    run: string;
    axes: string[];
    thresholds: Record<string, number>;
    metric?: string;
    threshold?: number;
    epoch?: number | null;
  }): Promise<ApiResult<FairnessPayload> | null> {
    return this.post("whatif", "/api/whatif", body);
  }

  correlation(columns: string[]): Promise<ApiResult<CorrelationPayload> | null> {
    const params = new URLSearchParams({ columns: columns.join(",") });
    return this.request("correlation", `/api/correlation?${params}`);
  }

  timeline(run: string, axes: string[], metric: string): Promise<ApiResult<TimelinePayload> | null> {
    const params = new URLSearchParams({ run, axes: axes.join(","), metric });
    return this.request("timeline:" + run, `/api/timeline?${params}`);
  }

  inout(run: string, axes: string[], metric: string): Promise<ApiResult<StabilityPayload> | null> {
    const params = new URLSearchParams({ run, axes: axes.join(","), metric });
    return this.request("inout:" + run, `/api/inout?${params}`);
  }
}
