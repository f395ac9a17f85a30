/** Collapsible panel: clicking the title hides the body and records the
 * panel id in the URL state, freeing space for the charts in use. */

import { clear, el } from "./dom.js";
import type { Store } from "./state.js";

export interface Panel {
  root: HTMLElement;
  body: HTMLElement;
}

export function createPanel(id: string, title: string, store: Store): Panel {
  const body = el("div", { class: "panel-body" });
  const header = el("h3", {
    class: "panel-title",
    text: title,
    onclick: () => {
      const collapsed = store.state.collapsed.includes(id)
        ? store.state.collapsed.filter((c) => c !== id)
        : [...store.state.collapsed, id];
      store.update({ collapsed });
    },
  });
  const root = el("section", { class: "panel", "data-panel": id }, [header, body]);

  const apply = () => {
    const hidden = store.state.collapsed.includes(id);
    root.classList.toggle("collapsed", hidden);
    body.style.display = hidden ? "none" : "";
  };
  store.subscribe(apply);
  apply();
  return { root, body };
}

export function replaceChildren(node: Element, ...children: Element[]): void {
  clear(node);
  for (const child of children) node.append(child);
}
