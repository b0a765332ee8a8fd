// Single source of truth for every view. No view keeps private selection
// state: interactions call store.update(), and all views re-render from the
// same object, which is what keeps brushing, group picks, and metric picks
// linked across the dashboard.

export interface BrushRange {
  from: number;
  to: number;
}

export interface SelectionState {
  runs: string[];
  tags: string[];
  axes: string[];
  metric: string;
  group: string | null;
  brush: BrushRange | null;
  epoch: number | null;
  thresholds: Record<string, number>;
  defaultThreshold: number;
}

export const initialState: SelectionState = {
  runs: [],
  tags: [],
  axes: [],
  metric: "accuracy",
  group: null,
  brush: null,
  epoch: null,
  thresholds: {},
  defaultThreshold: 0.5,
};

export type Listener = (state: SelectionState, changed: ReadonlySet<keyof SelectionState>) => void;

export class Store {
  private state: SelectionState;
  private listeners = new Set<Listener>();

  constructor(state: SelectionState = initialState) {
    this.state = { ...state };
  }

  get(): SelectionState {
    return this.state;
  }

  update(partial: Partial<SelectionState>): void {
    const changed = new Set<keyof SelectionState>();
    for (const key of Object.keys(partial) as (keyof SelectionState)[]) {
      if (!shallowEqual(this.state[key], partial[key])) changed.add(key);
    }
    if (changed.size === 0) return;
    this.state = { ...this.state, ...partial };
    for (const listener of [...this.listeners]) listener(this.state, changed);
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }
}

function shallowEqual(a: unknown, b: unknown): boolean {
  if (Object.is(a, b)) return true;
  if (Array.isArray(a) && Array.isArray(b)) {
    return a.length === b.length && a.every((v, i) => Object.is(v, b[i]));
  }
  if (a && b && typeof a === "object" && typeof b === "object") {
    const ka = Object.keys(a as object);
    const kb = Object.keys(b as object);
    return (
      ka.length === kb.length &&
      ka.every((k) => Object.is((a as Record<string, unknown>)[k], (b as Record<string, unknown>)[k]))
    );
  }
  return false;
}
