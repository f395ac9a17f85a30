/** View state shared by every panel, serializable to the URL query string
 * so any view can be bookmarked or sent to a colleague. */

import { METRICS, type MetricName } from "./types.js";

export interface ViewState {
  k: number | null;
  cluster: number | null;
  color: MetricName | null;
  classes: string[];
  swap: boolean;
  collapsed: string[];
}

export const DEFAULT_STATE: ViewState = {
  k: null,
  cluster: null,
  color: null,
  classes: [],
  swap: false,
  collapsed: [],
};

export function serializeState(s: ViewState): string {
  const q = new URLSearchParams();
  if (s.k != null) q.set("k", String(s.k));
  if (s.cluster != null) q.set("cluster", String(s.cluster));
  if (s.color != null) q.set("color", s.color);
  if (s.classes.length) q.set("classes", s.classes.map(encodeURIComponent).join(","));
  if (s.swap) q.set("swap", "1");
  if (s.collapsed.length) q.set("collapsed", s.collapsed.map(encodeURIComponent).join(","));
  return q.toString();
}

export function deserializeState(query: string): ViewState {
  const q = new URLSearchParams(query.startsWith("?") ? query.slice(1) : query);
  const num = (key: string): number | null => {
    const raw = q.get(key);
    if (raw == null || raw === "" || !/^\d+$/.test(raw)) return null;
    return parseInt(raw, 10);
  };
  const list = (key: string): string[] => {
    const raw = q.get(key);
    return raw ? raw.split(",").filter(Boolean).map(decodeURIComponent) : [];
  };
  const color = q.get("color");
  const state: ViewState = {
    k: num("k"),
    cluster: num("cluster"),
    color: (METRICS as readonly string[]).includes(color ?? "") ? (color as MetricName) : null,
    classes: list("classes"),
    swap: q.get("swap") === "1",
    collapsed: list("collapsed"),
  };
  return enforceInvariants(state);
}

/** A selected cluster id must stay below the selected k. */
export function enforceInvariants(s: ViewState): ViewState {
  if (s.cluster != null && s.k != null && s.cluster >= s.k) {
    return { ...s, cluster: null };
  }
  return s;
}

export type Listener = (state: ViewState, prev: ViewState) => void;

export class Store {
  state: ViewState;
  private listeners: Listener[] = [];

  constructor(initial: ViewState = { ...DEFAULT_STATE }) {
    this.state = enforceInvariants(initial);
  }

  update(patch: Partial<ViewState>): void {
    const prev = this.state;
    this.state = enforceInvariants({ ...prev, ...patch });
    for (const fn of [...this.listeners]) fn(this.state, prev);
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((x) => x !== fn);
    };
  }
}
