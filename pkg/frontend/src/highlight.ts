/** Class search + chips. Selected classes persist in the URL state and are
 * re-resolved to a cluster set whenever k changes; plots dim clusters that
 * contain no image of any selected class. Hidden for label-free datasets. */

import type { Api } from "./api.js";
import { clear, el } from "./dom.js";
import type { Store } from "./state.js";

export function renderHighlightControls(container: HTMLElement, api: Api,
                                        store: Store): void {
  clear(container);
  const results = el("ul", { class: "label-results" });
  const input = el("input", {
    class: "label-search",
    type: "search",
    placeholder: "highlight classes...",
  });
  input.addEventListener("input", async () => {
    clear(results);
    const q = input.value.trim();
    if (!q) return;
    const matches = await api.labels(q);
    for (const label of matches.slice(0, 12)) {
      if (store.state.classes.includes(label)) continue;
      results.append(el("li", {
        class: "label-result",
        text: label,
        onclick: () => {
          store.update({ classes: [...store.state.classes, label] });
          input.value = "";
          clear(results);
        },
      }));
    }
  });

  const chips = el("div", { class: "label-chips" });
  const renderChips = () => {
    clear(chips);
    for (const cls of store.state.classes) {
      chips.append(el("span", { class: "chip", "data-class": cls }, [
        cls,
        el("button", {
          class: "chip-x",
          text: "×",
          onclick: () => store.update({
            classes: store.state.classes.filter((c) => c !== cls),
          }),
        }),
      ]));
    }
  };
  store.subscribe(renderChips);
  renderChips();
  container.append(input, results, chips);
}
