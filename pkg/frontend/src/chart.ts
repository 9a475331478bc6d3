/** Pure geometry for the power/size curve and its CSV export. */

import type { CurvePoint, SweepAxis } from "./types.js";

export interface ChartGeometry {
  width: number;
  height: number;
  path: string;
  /** y-pixel of the nominal-power reference line, when the y axis is power. */
  referenceY: number | null;
  xTicks: { px: number; label: string }[];
  yTicks: { px: number; label: string }[];
  markers: { px: number; py: number; x: number; y: number }[];
  xLabel: string;
  yLabel: string;
}

const PAD = { left: 52, right: 16, top: 12, bottom: 34 };

export function axisValues(points: CurvePoint[], sweep: SweepAxis): number[] {
  return points.map((p) =>
    sweep === "phi" ? (p.phi as number) : sweep === "hr" ? (p.hr as number) : p.n,
  );
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const step = (hi - lo) / (n - 1);
  return Array.from({ length: n }, (_, i) => lo + i * step);
}

function fmt(x: number): string {
  if (Number.isInteger(x)) return String(x);
  return x.toPrecision(3);
}

/**
 * Lay the sweep out as power-vs-axis when sweeping n, and size-vs-axis
 * otherwise, with a reference line at the nominal power target.
 */
export function buildChartGeometry(
  points: CurvePoint[],
  sweep: SweepAxis,
  nominalPower: number,
  width = 560,
  height = 300,
): ChartGeometry {
  if (points.length < 2) throw new Error("need at least two curve points");
  const xs = axisValues(points, sweep);
  const ys = points.map((p) => (sweep === "n" ? p.power : p.n));
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = sweep === "n" ? 0 : Math.min(...ys) * 0.95;
  const yHi = sweep === "n" ? 1 : Math.max(...ys) * 1.05;
  const plotW = width - PAD.left - PAD.right;
  const plotH = height - PAD.top - PAD.bottom;
  const px = (x: number) => PAD.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const py = (y: number) => PAD.top + (1 - (y - yLo) / (yHi - yLo)) * plotH;

  const path = points
    .map((_, i) => `${i === 0 ? "M" : "L"}${px(xs[i] as number).toFixed(2)} ${py(ys[i] as number).toFixed(2)}`)
    .join(" ");
  return {
    width,
    height,
    path,
    referenceY: sweep === "n" ? py(nominalPower) : null,
    xTicks: niceTicks(xLo, xHi).map((x) => ({ px: px(x), label: fmt(x) })),
    yTicks: niceTicks(yLo, yHi).map((y) => ({ px: py(y), label: fmt(y) })),
    markers: points.map((_, i) => ({
      px: px(xs[i] as number),
      py: py(ys[i] as number),
      x: xs[i] as number,
      y: ys[i] as number,
    })),
    xLabel: sweep === "n" ? "sample size" : sweep === "phi" ? "overlap coefficient" : "hazard ratio",
    yLabel: sweep === "n" ? "power" : "required sample size",
  };
}

/** CSV export of the raw curve points (axis, n, power). */
export function curveToCsv(points: CurvePoint[], sweep: SweepAxis): string {
  const header = sweep === "n" ? "n,power" : `${sweep},n,power`;
  const rows = points.map((p) => {
    if (sweep === "n") return `${p.n},${p.power}`;
    const axis = sweep === "phi" ? p.phi : p.hr;
    return `${axis},${p.n},${p.power}`;
  });
  return [header, ...rows].join("\n") + "\n";
}
