/** Tiny DOM builders; enough that no framework is needed. */

const SVG_NS = "http://www.w3.org/2000/svg";

type Attrs = Record<string, string | number | boolean | ((ev: Event) => void)>;

function applyAttrs(node: Element, attrs: Attrs): void {
  for (const [key, val] of Object.entries(attrs)) {
    if (typeof val === "function") {
      node.addEventListener(key.replace(/^on/, ""), val as EventListener);
    } else if (key === "text") {
      node.textContent = String(val);
    } else if (val === false) {
      continue;
    } else {
      node.setAttribute(key, String(val));
    }
  }
}

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  children: (Element | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  applyAttrs(node, attrs);
  for (const child of children) {
    node.append(child instanceof Element ? child : document.createTextNode(child));
  }
  return node;
}

export function svgEl(tag: string, attrs: Attrs = {}): SVGElement {
  const node = document.createElementNS(SVG_NS, tag) as SVGElement;
  applyAttrs(node, attrs);
  return node;
}

export function clear(node: Element): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}
