// Undefined metrics are rendered as explicit "n/a" badges, never as 0 or
// an empty bar. Displayed numbers are the server's values; formatting only
// truncates for layout, with the exact value kept in the title attribute.

export function isDefined(value: number | null | undefined): value is number {
  return value !== null && value !== undefined && Number.isFinite(value);
}

export function metricCell(value: number | null | undefined, digits = 4): HTMLElement {
  const span = document.createElement("span");
  if (!isDefined(value)) {
    span.className = "na-badge";
    span.textContent = "n/a";
    return span;
  }
  span.className = "metric-value";
  span.textContent = value.toFixed(digits);
  span.title = String(value);
  return span;
}

export function fmt(value: number | null | undefined, digits = 4): string {
  return isDefined(value) ? value.toFixed(digits) : "n/a";
}

const PALETTE = [
  "#3366cc", "#dc3912", "#ff9900", "#109618", "#990099",
  "#0099c6", "#dd4477", "#66aa00", "#b82e2e", "#316395",
];

export function runColor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function svg<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}
