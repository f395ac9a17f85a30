/** Side-by-side sample grids for the selected cluster.
 *
 * One scrollable grid per split (left/right order follows the swap control),
 * thumbnails captioned with their class label when present; the server
 * already groups same-class members together. Embedding-only datasets show
 * id/label cards instead of images. Clicking an item opens a larger view
 * with its metadata.
 */

import { clear, el } from "./dom.js";
import type { SampleItem, Summary } from "./types.js";

function detailOverlay(item: SampleItem): HTMLElement {
  const fields: [string, string][] = [["id", item.id], ["split", item.split]];
  if (item.label) fields.push(["label", item.label]);
  fields.push(["layout", `${item.x.toFixed(3)}, ${item.y.toFixed(3)}`]);
  const body = el("div", { class: "detail-card" });
  if (item.thumb_url) {
    // the stored original when available, otherwise the thumbnail itself
    body.append(el("img", { src: item.thumb_url.replace("/thumbs/", "/images/"),
                            class: "detail-img", alt: item.id }));
  }
  const meta = el("dl", { class: "detail-meta" });
  for (const [key, val] of fields) {
    meta.append(el("dt", { text: key }), el("dd", { text: val }));
  }
  body.append(meta);
  const overlay = el("div", { class: "overlay", onclick: () => overlay.remove() }, [body]);
  return overlay;
}

function gridItem(item: SampleItem): HTMLElement {
  const children: Element[] = [];
  if (item.thumb_url) {
    children.push(el("img", { src: item.thumb_url, class: "thumb", alt: item.id,
                              loading: "lazy" }));
  } else {
    children.push(el("div", { class: "thumb card" }, [
      el("span", { class: "card-id", text: item.id }),
    ]));
  }
  if (item.label) children.push(el("span", { class: "thumb-label", text: item.label }));
  const cell = el("figure", {
    class: "grid-item",
    "data-id": item.id,
    "data-split": item.split,
    onclick: () => document.body.append(detailOverlay(item)),
  }, children);
  return cell;
}

export function renderSampleGrids(container: HTMLElement, samples: SampleItem[],
                                  summary: Summary, swap: boolean,
                                  clusterId: number | null): void {
  clear(container);
  if (clusterId === null) {
    container.append(el("p", { class: "hint", text: "Select a cluster to see its samples." }));
    return;
  }
  container.setAttribute("data-cluster", String(clusterId));
  const [a, b] = summary.split_names;
  const order = swap ? [b, a] : [a, b];
  for (const split of order) {
    const members = samples.filter((s) => s.split === split);
    const grid = el("div", { class: "sample-grid", "data-grid": split });
    for (const item of members) grid.append(gridItem(item));
    container.append(el("div", { class: "split-col" }, [
      el("h4", { class: "split-name", text: `${split} (${members.length})` }),
      grid,
    ]));
  }
}
