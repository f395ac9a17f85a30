/** SVG renderers for the cluster views: beeswarm metric plots and the two
 * 2-D scatter plots. All cluster dots carry data-cluster attributes and a
 * shared visual vocabulary: orange = selected, dimmed = not in the
 * highlighted-class set, fill = active color encoding (identical function
 * of the encoded metric in every plot).
 */

import { beeswarmLayout } from "./beeswarm.js";
import { BASE_COLOR, DIM_OPACITY, LEFT_COLOR, RIGHT_COLOR, SELECT_COLOR,
         metricColor } from "./color.js";
import { el, svgEl } from "./dom.js";
import type { ClusterRow, MetricName, SampleItem } from "./types.js";
import { METRICS, METRIC_TITLES } from "./types.js";

export interface ClusterPaint {
  selected: number | null;
  colorBy: MetricName | null;
  /** null = no class highlight active; otherwise only these stay bright */
  highlight: Set<number> | null;
  onSelect(clusterId: number): void;
}

function colorRange(rows: ClusterRow[], metric: MetricName): [number, number] {
  const vals = rows.map((r) => r[metric]);
  return [Math.min(...vals), Math.max(...vals)];
}

/** Fill for a cluster dot; the same function in every plot. */
export function clusterFill(row: ClusterRow, rows: ClusterRow[], paint: ClusterPaint): string {
  if (paint.colorBy != null) {
    const [min, max] = colorRange(rows, paint.colorBy);
    return metricColor(row[paint.colorBy], min, max);
  }
  return row.id === paint.selected ? SELECT_COLOR : BASE_COLOR;
}

function decorate(circle: SVGElement, row: ClusterRow, rows: ClusterRow[],
                  paint: ClusterPaint): void {
  circle.setAttribute("data-cluster", String(row.id));
  circle.setAttribute("fill", clusterFill(row, rows, paint));
  circle.classList.add("dot");
  if (row.id === paint.selected) {
    circle.classList.add("selected");
    circle.setAttribute("stroke", SELECT_COLOR);
    circle.setAttribute("stroke-width", "2");
  }
  if (paint.highlight !== null && !paint.highlight.has(row.id)) {
    circle.classList.add("dim");
    circle.style.opacity = DIM_OPACITY;
  }
  circle.addEventListener("click", () => paint.onSelect(row.id));
}

const SWARM_WIDTH = 640;
const SWARM_HEIGHT = 96;
const DOT_R = 4;

export function renderBeeswarm(metric: MetricName, rows: ClusterRow[],
                               paint: ClusterPaint,
                               onToggleColor: (m: MetricName) => void): HTMLElement {
  // undefined metrics were serialized as 0, so degenerate clusters sit at
  // the axis origin instead of disappearing
  const { dots, scale } = beeswarmLayout(
    rows.map((r) => ({ clusterId: r.id, value: r[metric] })), SWARM_WIDTH, DOT_R);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${SWARM_WIDTH} ${SWARM_HEIGHT}`,
    class: "beeswarm",
    "data-plot": `beeswarm:${metric}`,
  });
  const axisY = SWARM_HEIGHT - 14;
  svg.append(svgEl("line", {
    x1: scale.range[0], x2: scale.range[1], y1: axisY, y2: axisY, class: "axis",
  }));
  for (const t of [0, 0.5, 1]) {
    const v = scale.domain[0] + t * (scale.domain[1] - scale.domain[0]);
    const label = svgEl("text", {
      x: scale.apply(v), y: SWARM_HEIGHT - 2, class: "tick", "text-anchor": "middle",
    });
    label.textContent = v.toPrecision(3);
    svg.append(label);
  }
  const mid = axisY / 2 + 4;
  const byId = new Map(rows.map((r) => [r.id, r]));
  for (const dot of dots) {
    const row = byId.get(dot.clusterId)!;
    const circle = svgEl("circle", { cx: dot.x, cy: mid + dot.y, r: dot.r });
    decorate(circle, row, rows, paint);
    svg.append(circle);
  }

  const toggle = el("button", {
    class: "rainbow-toggle" + (paint.colorBy === metric ? " active" : ""),
    title: "color all charts by this metric",
    "data-toggle": metric,
    onclick: () => onToggleColor(metric),
    text: "\u{1F308}",
  });
  const head = el("div", { class: "swarm-head" }, [
    el("span", { class: "swarm-title", text: METRIC_TITLES[metric] }), toggle,
  ]);
  return el("div", { class: "swarm", "data-metric": metric }, [head, svg]);
}

export function renderAllBeeswarms(rows: ClusterRow[], paint: ClusterPaint,
                                   onToggleColor: (m: MetricName) => void): HTMLElement {
  const wrap = el("div", { class: "swarms" });
  for (const metric of METRICS) {
    wrap.append(renderBeeswarm(metric, rows, paint, onToggleColor));
  }
  return wrap;
}

const SCATTER_SIZE = 320;

function fitScale(xs: number[], ys: number[], size: number, pad: number) {
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  const y0 = Math.min(...ys), y1 = Math.max(...ys);
  const span = Math.max(x1 - x0, y1 - y0) || 1;
  const s = (size - 2 * pad) / span;
  return (x: number, y: number): [number, number] => [
    pad + (x - (x0 + x1) / 2) * s + (size - 2 * pad) / 2,
    pad + (y - (y0 + y1) / 2) * s + (size - 2 * pad) / 2,
  ];
}

/** Centroid scatter: one dot per cluster in embedding-space layout. */
export function renderCentroidScatter(rows: ClusterRow[], paint: ClusterPaint): SVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${SCATTER_SIZE} ${SCATTER_SIZE}`,
    class: "scatter",
    "data-plot": "centroids",
  });
  if (!rows.length) return svg;
  const place = fitScale(rows.map((r) => r.x), rows.map((r) => r.y), SCATTER_SIZE, 10);
  for (const row of rows) {
    const [cx, cy] = place(row.x, row.y);
    const circle = svgEl("circle", { cx, cy, r: 5 });
    decorate(circle, row, rows, paint);
    svg.append(circle);
  }
  return svg;
}

/** Sample scatter for the selected cluster; left split blue, right red. */
export function renderSampleScatter(samples: SampleItem[], leftName: string,
                                    onHover?: (s: SampleItem | null) => void): SVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${SCATTER_SIZE} ${SCATTER_SIZE}`,
    class: "scatter",
    "data-plot": "samples",
  });
  if (!samples.length) return svg;
  const place = fitScale(samples.map((s) => s.x), samples.map((s) => s.y), SCATTER_SIZE, 10);
  for (const s of samples) {
    const [cx, cy] = place(s.x, s.y);
    const circle = svgEl("circle", {
      cx, cy, r: 3,
      fill: s.split === leftName ? LEFT_COLOR : RIGHT_COLOR,
      class: "dot sample-dot",
      "data-id": s.id,
      "data-split": s.split,
    });
    if (onHover) {
      circle.addEventListener("mouseenter", () => onHover(s));
      circle.addEventListener("mouseleave", () => onHover(null));
    }
    svg.append(circle);
  }
  return svg;
}
