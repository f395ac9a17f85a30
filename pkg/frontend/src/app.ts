/** Wires the panels together around one shared ViewState store.
 *
 * Linked selection: clicking a cluster dot anywhere updates the store; every
 * cluster view re-renders synchronously from cached rows in the same frame,
 * so the selected cluster is always identical across the beeswarms, the
 * centroid plot, the sample projection and the thumbnail grids. Sample data
 * arrives asynchronously behind a request generation counter, so rapid
 * clicks never interleave stale responses.
 */

import { Api } from "./api.js";
import { clear, el } from "./dom.js";
import { renderHighlightControls } from "./highlight.js";
import { createPanel, replaceChildren } from "./panels.js";
import { renderAllBeeswarms, renderCentroidScatter, renderSampleScatter,
         type ClusterPaint } from "./plots.js";
import { renderSampleGrids } from "./sample_viewer.js";
import { deserializeState, serializeState, Store } from "./state.js";
import type { ClusterRow, MetricName, SampleItem, Summary } from "./types.js";

function fmt(value: number, undef: string[], name: string): string {
  return undef.includes(name) ? "undefined" : value.toPrecision(5);
}

export class App {
  store: Store;
  summary: Summary | null = null;
  rows: ClusterRow[] = [];
  samples: SampleItem[] = [];
  highlightSet: Set<number> | null = null;

  private panels: Record<string, { root: HTMLElement; body: HTMLElement }> = {};
  private sampleGeneration = 0;
  private pending = 0;
  private idleResolvers: (() => void)[] = [];
  private syncUrl: boolean;

  constructor(private root: HTMLElement, private api: Api,
              store?: Store, opts: { syncUrl?: boolean } = {}) {
    this.store = store ?? new Store(deserializeState(
      typeof location === "undefined" ? "" : location.search));
    this.syncUrl = opts.syncUrl ?? true;
  }

  /** Resolves once every in-flight load, including its DOM update, settled.
   * Loads are tracked as whole operations (fetch + render), so idle really
   * means the view is consistent with the state. */
  whenIdle(): Promise<void> {
    if (this.pending === 0) return Promise.resolve();
    return new Promise((resolve) => this.idleResolvers.push(resolve));
  }

  private track<T>(p: Promise<T>): Promise<T> {
    this.pending += 1;
    const done = () => {
      this.pending -= 1;
      if (this.pending === 0) {
        for (const fn of this.idleResolvers.splice(0)) fn();
      }
    };
    return p.then((v) => { done(); return v; }, (err) => { done(); throw err; });
  }

  async start(): Promise<void> {
    this.summary = await this.api.summary();
    this.buildSkeleton();

    this.store.subscribe((state, prev) => {
      if (this.syncUrl && typeof history !== "undefined") {
        history.replaceState(null, "", "?" + serializeState(state));
      }
      if (state.k !== prev.k) {
        void this.track(this.loadK());
        return;
      }
      if (state.classes !== prev.classes) {
        void this.track(this.resolveHighlight().then(() => this.renderClusterViews()));
        return;
      }
      if (state.cluster !== prev.cluster) {
        this.renderClusterViews();        // same-frame selection everywhere
        this.loadSamples();
        return;
      }
      if (state.color !== prev.color || state.swap !== prev.swap) {
        this.renderClusterViews();
        this.renderSampleViews();
      }
    });

    if (this.store.state.k == null || !this.summary.k_list.includes(this.store.state.k)) {
      this.store.update({ k: this.summary.k_list[0] });
    } else {
      await this.loadK();
    }
  }

  private buildSkeleton(): void {
    const s = this.summary!;
    clear(this.root);
    const controls = el("div", { class: "controls" });

    const kSelect = el("select", { class: "k-select", "data-control": "k" });
    for (const k of s.k_list) {
      kSelect.append(el("option", { value: String(k), text: `${k} clusters` }));
    }
    kSelect.addEventListener("change", () => {
      this.store.update({ k: parseInt(kSelect.value, 10), cluster: null });
    });
    const swapBtn = el("button", {
      class: "swap-btn", "data-control": "swap", text: "⇄ swap splits",
      onclick: () => this.store.update({ swap: !this.store.state.swap }),
    });
    controls.append(
      el("span", { class: "brand", text: "ravel" }),
      el("span", { class: "embedding-name", text: s.embedding_name }),
      kSelect, swapBtn);
    const highlightBox = el("div", { class: "highlight-box" });
    if (s.has_labels) {
      renderHighlightControls(highlightBox, this.api, this.store);
    }
    controls.append(highlightBox);

    const charts = el("div", { class: "charts-col" });
    const viewer = el("div", { class: "viewer-col" });
    for (const [id, title, host] of [
      ["summary", "Summary statistics", charts],
      ["metrics", "Cluster metrics", charts],
      ["umap-clusters", "Cluster projection", charts],
      ["umap-samples", "Selected cluster projection", charts],
      ["samples", "Sample viewer", viewer],
    ] as const) {
      this.panels[id] = createPanel(id, title, this.store);
      host.append(this.panels[id].root);
    }
    this.renderSummaryTable();
    this.root.append(controls, el("div", { class: "columns" }, [charts, viewer]));

    const sel = kSelect as HTMLSelectElement;
    if (this.store.state.k != null) sel.value = String(this.store.state.k);
  }

  private renderSummaryTable(): void {
    const s = this.summary!;
    const table = el("table", { class: "summary-table" });
    const rows: [string, string][] = [
      ["samples", String(s.n_total)],
      [`${s.split_names[0]} (left)`, String(s.n_left)],
      [`${s.split_names[1]} (right)`, String(s.n_right)],
      ["Fréchet distance", fmt(s.frechet_distance, s.undefined, "frechet_distance")],
      ["precision", fmt(s.precision, s.undefined, "precision")],
      ["recall", fmt(s.recall, s.undefined, "recall")],
      ["embedding", s.embedding_name],
    ];
    for (const [name, value] of rows) {
      table.append(el("tr", {}, [el("td", { text: name }), el("td", { text: value })]));
    }
    replaceChildren(this.panels["summary"].body, table);
  }

  private paint(): ClusterPaint {
    return {
      selected: this.store.state.cluster,
      colorBy: this.store.state.color as MetricName | null,
      highlight: this.highlightSet,
      onSelect: (clusterId) => this.store.update({ cluster: clusterId }),
    };
  }

  private async loadK(): Promise<void> {
    const k = this.store.state.k;
    if (k == null) return;
    this.rows = await this.api.clusters(k);
    await this.resolveHighlight();
    this.renderClusterViews();
    this.loadSamples();
  }

  private async resolveHighlight(): Promise<void> {
    const { k, classes } = this.store.state;
    if (k == null || classes.length === 0) {
      this.highlightSet = null;
      return;
    }
    const ids = await this.api.labelClusters(k, classes);
    this.highlightSet = new Set(ids);
  }

  private renderClusterViews(): void {
    const paint = this.paint();
    replaceChildren(this.panels["metrics"].body,
                    renderAllBeeswarms(this.rows, paint,
                                       (m) => this.toggleColor(m)));
    replaceChildren(this.panels["umap-clusters"].body,
                    renderCentroidScatter(this.rows, paint) as unknown as HTMLElement);
  }

  private toggleColor(metric: MetricName): void {
    this.store.update({ color: this.store.state.color === metric ? null : metric });
  }

  private loadSamples(): void {
    const { k, cluster } = this.store.state;
    this.samples = [];
    this.renderSampleViews();   // clears stale content immediately
    if (k == null || cluster == null) return;
    const generation = ++this.sampleGeneration;
    void this.track(this.api.samples(k, cluster).then((samples) => {
      if (generation !== this.sampleGeneration) return;  // overtaken by a newer click
      this.samples = samples;
      this.renderSampleViews();
    }));
  }

  private renderSampleViews(): void {
    const s = this.summary!;
    const { cluster, swap } = this.store.state;
    const scatterHost = this.panels["umap-samples"].body;
    clear(scatterHost);
    scatterHost.setAttribute("data-cluster", cluster == null ? "" : String(cluster));
    if (this.samples.length) {
      const tooltip = el("div", { class: "hover-preview" });
      const svg = renderSampleScatter(this.samples, s.split_names[0], (item) => {
        clear(tooltip);
        if (!item) return;
        if (item.thumb_url) {
          tooltip.append(el("img", { src: item.thumb_url, alt: item.id }));
        }
        tooltip.append(el("span", { text: item.label ? `${item.id} · ${item.label}` : item.id }));
      });
      scatterHost.append(svg as unknown as HTMLElement, tooltip);
    }
    renderSampleGrids(this.panels["samples"].body, this.samples, s, swap, cluster);
  }
}

export { Api };
