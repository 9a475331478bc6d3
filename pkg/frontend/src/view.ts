/** DOM rendering: thin, browser-only layer over the pure view models. */

import type { ChartGeometry } from "./chart.js";
import type { ReportView } from "./format.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderReport(root: HTMLElement, view: ReportView): void {
  root.querySelector(".result-n")!.textContent = view.n;
  root.querySelector(".result-events")!.textContent = view.expectedEvents;
  root.querySelector(".result-variance")!.textContent = view.variance;
  root.querySelector(".result-power")!.textContent = view.achievedPower;
  const vif = root.querySelector(".result-vif-row") as HTMLElement;
  vif.hidden = view.vif === null;
  if (view.vif !== null) {
    root.querySelector(".result-vif")!.textContent = view.vif;
  }
  const badge = root.querySelector(".overlap-badge") as HTMLElement;
  badge.hidden = view.overlapCategory === null;
  if (view.overlapCategory !== null) {
    badge.textContent = `${view.overlapCategory} overlap`;
    badge.dataset.category = view.overlapCategory;
  }
  const tbody = root.querySelector(".comparator-body") as HTMLElement;
  tbody.replaceChildren(
    ...view.comparators.map((row) => {
      const tr = document.createElement("tr");
      const name = document.createElement("td");
      name.textContent = row.label;
      const n = document.createElement("td");
      n.textContent = row.n;
      tr.append(name, n);
      return tr;
    }),
  );
  const sens = root.querySelector(".sensitivity-range") as HTMLElement;
  sens.hidden = view.sensitivity === null;
  if (view.sensitivity) {
    sens.querySelector(".range-low")!.textContent = view.sensitivity.nLow;
    sens.querySelector(".range-high")!.textContent = view.sensitivity.nHigh;
    (sens.querySelector(".range-clamped") as HTMLElement).hidden =
      !view.sensitivity.clamped;
  }
  root.querySelector(".provenance-body")!.textContent = view.provenance;
  root.querySelector(".engine-version")!.textContent = view.engineVersion;
}

export function setStale(root: HTMLElement, stale: boolean): void {
  root.classList.toggle("stale", stale);
}

export function renderFieldErrors(
  form: HTMLElement,
  errors: Record<string, string>,
): void {
  for (const el of form.querySelectorAll<HTMLElement>(".field-error")) {
    const field = el.dataset.for ?? "";
    el.textContent = errors[field] ?? "";
    el.hidden = !(field in errors);
  }
}

export function renderChart(svg: SVGSVGElement, geo: ChartGeometry): void {
  svg.setAttribute("viewBox", `0 0 ${geo.width} ${geo.height}`);
  svg.replaceChildren();
  const mk = (tag: string, attrs: Record<string, string>): SVGElement => {
    const el = document.createElementNS(SVG_NS, tag);
    for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
    svg.append(el);
    return el;
  };
  for (const tick of geo.yTicks) {
    mk("line", {
      x1: "48", x2: String(geo.width - 16),
      y1: String(tick.px), y2: String(tick.px),
      class: "gridline",
    });
    const label = mk("text", { x: "44", y: String(tick.px + 4), class: "tick" });
    label.textContent = tick.label;
    label.setAttribute("text-anchor", "end");
  }
  for (const tick of geo.xTicks) {
    const label = mk("text", {
      x: String(tick.px), y: String(geo.height - 14), class: "tick",
    });
    label.textContent = tick.label;
    label.setAttribute("text-anchor", "middle");
  }
  if (geo.referenceY !== null) {
    mk("line", {
      x1: "48", x2: String(geo.width - 16),
      y1: String(geo.referenceY), y2: String(geo.referenceY),
      class: "reference",
    });
  }
  mk("path", { d: geo.path, class: "curve" });
  for (const m of geo.markers) {
    const dot = mk("circle", {
      cx: String(m.px), cy: String(m.py), r: "3.5", class: "marker",
    });
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${m.x}: ${m.y}`;
    dot.append(title);
  }
  const xl = mk("text", {
    x: String(geo.width / 2), y: String(geo.height - 2), class: "axis-label",
  });
  xl.textContent = geo.xLabel;
  xl.setAttribute("text-anchor", "middle");
  const yl = mk("text", {
    x: "12", y: String(geo.height / 2), class: "axis-label",
    transform: `rotate(-90 12 ${geo.height / 2})`,
  });
  yl.textContent = geo.yLabel;
  yl.setAttribute("text-anchor", "middle");
}

/** Rasterize the SVG chart to a PNG download. */
export function exportChartPng(svg: SVGSVGElement, filename: string): void {
  const xml = new XMLSerializer().serializeToString(svg);
  const image = new Image();
  image.onload = () => {
    const canvas = document.createElement("canvas");
    canvas.width = svg.viewBox.baseVal.width * 2;
    canvas.height = svg.viewBox.baseVal.height * 2;
    const ctx = canvas.getContext("2d")!;
    ctx.fillStyle = "#ffffff";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.drawImage(image, 0, 0, canvas.width, canvas.height);
    canvas.toBlob((blob) => {
      if (blob) triggerDownload(blob, filename);
    }, "image/png");
  };
  image.src = `data:image/svg+xml;charset=utf-8,${encodeURIComponent(xml)}`;
}

export function triggerDownload(blob: Blob, filename: string): void {
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}
