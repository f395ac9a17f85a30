import { Api, App } from "./app.js";
import { deserializeState, Store } from "./state.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");

const store = new Store(deserializeState(location.search));
const app = new App(root, new Api(), store);

window.addEventListener("popstate", () => {
  store.update(deserializeState(location.search));
});

void app.start();
