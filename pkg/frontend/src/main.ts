/** Wiring: form state <-> engine API <-> rendered report and curve. */

import { ApiClient, ApiError } from "./api.js";
import { buildChartGeometry, curveToCsv } from "./chart.js";
import { buildReportView } from "./format.js";
import { buildCurveRequest, buildReportRequest } from "./payload.js";
import { defaultState, parseScenario, serializeScenario, validateState } from "./state.js";
import type { CalculatorState, CurveReport, PowerReport, SweepAxis } from "./types.js";
import {
  exportChartPng,
  renderChart,
  renderFieldErrors,
  renderReport,
  setStale,
  triggerDownload,
} from "./view.js";

const api = new ApiClient("");
const curveApi = new ApiClient("");
let state: CalculatorState = defaultState();
let lastN: number | null = null;
let lastCurve: CurveReport | null = null;

const $ = <T extends HTMLElement>(sel: string): T =>
  document.querySelector(sel) as T;

function readNumber(id: string): number {
  return Number(($(`#${id}`) as unknown as HTMLInputElement).value);
}

function readForm(): CalculatorState {
  const kind = ($("#kind") as unknown as HTMLSelectElement).value as
    | "rct"
    | "observational";
  return {
    kind,
    r: readNumber("r"),
    hr: readNumber("hr"),
    armSpecificRates: ($("#arm-rates") as unknown as HTMLInputElement).checked,
    d: readNumber("d"),
    d1: readNumber("d1"),
    d0: readNumber("d0"),
    alpha: readNumber("alpha"),
    power: readNumber("power"),
    sides: readNumber("sides") === 2 ? 2 : 1,
    phi: readNumber("phi"),
    scheme: ($("#scheme") as unknown as HTMLSelectElement).value as
      | "ipw"
      | "overlap"
      | "treated",
    seed: readNumber("seed") || 0,
    sensitivity: {
      enabled: ($("#sens-enabled") as unknown as HTMLInputElement).checked,
      rho1: readNumber("rho1"),
      rho0: readNumber("rho0"),
      gammaEnabled: ($("#gamma-enabled") as unknown as HTMLInputElement).checked,
      gamma: readNumber("gamma"),
    },
    sweep: ($("#sweep") as unknown as HTMLSelectElement).value as SweepAxis,
  };
}

function writeForm(next: CalculatorState): void {
  const set = (id: string, value: unknown) => {
    const el = $(`#${id}`) as unknown as HTMLInputElement;
    if (el.type === "checkbox") el.checked = Boolean(value);
    else el.value = String(value);
  };
  set("kind", next.kind);
  set("r", next.r);
  set("hr", next.hr);
  set("arm-rates", next.armSpecificRates);
  set("d", next.d);
  set("d1", next.d1);
  set("d0", next.d0);
  set("alpha", next.alpha);
  set("power", next.power);
  set("sides", next.sides);
  set("phi", next.phi);
  set("scheme", next.scheme);
  set("seed", next.seed);
  set("sens-enabled", next.sensitivity.enabled);
  set("rho1", next.sensitivity.rho1);
  set("rho0", next.sensitivity.rho0);
  set("gamma-enabled", next.sensitivity.gammaEnabled);
  set("gamma", next.sensitivity.gamma);
  set("sweep", next.sweep);
  syncVisibility();
}

function syncVisibility(): void {
  const obs = state.kind === "observational";
  $("#obs-panel").hidden = !obs;
  $("#sens-panel").hidden = !(obs && state.scheme === "ipw");
  $("#combined-rate").hidden = state.armSpecificRates;
  $("#arm-rate-fields").hidden = !state.armSpecificRates;
  $("#phi-value").textContent = state.phi.toFixed(3);
}

async function recompute(): Promise<void> {
  state = readForm();
  syncVisibility();
  const errors = validateState(state);
  renderFieldErrors($("#design-form"), errors);
  if (Object.keys(errors).length > 0) return;
  setStale($("#results"), true);
  const { command, payload } = buildReportRequest(state);
  try {
    const resp = await api.post<PowerReport>(command, payload);
    renderReport($("#results"), buildReportView(resp));
    lastN = resp.doc.n;
    setStale($("#results"), false);
    renderFieldErrors($("#design-form"), {});
    void refreshCurve();
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") return;
    if (err instanceof ApiError) {
      const field = err.doc.offending_field ?? "phi";
      const message =
        err.doc.code === "infinite-variance" && err.doc.min_phi !== undefined
          ? `${err.doc.message}`
          : err.doc.message;
      renderFieldErrors($("#design-form"), { [field]: message });
      return;
    }
    throw err;
  }
}

async function refreshCurve(): Promise<void> {
  const { command, payload } = buildCurveRequest(state, state.sweep, lastN);
  try {
    const resp = await curveApi.post<CurveReport>(command, payload);
    lastCurve = resp.doc;
    renderChart(
      $("#chart") as unknown as SVGSVGElement,
      buildChartGeometry(resp.doc.points, state.sweep, state.power),
    );
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") return;
    if (err instanceof ApiError) return; // sweep errors are non-fatal
    throw err;
  }
}

function wire(): void {
  $("#design-form").addEventListener("input", () => void recompute());
  $("#design-form").addEventListener("change", () => void recompute());
  $("#save-scenario").addEventListener("click", () => {
    triggerDownload(
      new Blob([serializeScenario(state)], { type: "application/json" }),
      "scenario.json",
    );
  });
  ($("#load-scenario") as unknown as HTMLInputElement).addEventListener(
    "change",
    async (event) => {
      const input = event.target as HTMLInputElement;
      const file = input.files?.[0];
      if (!file) return;
      try {
        writeForm(parseScenario(await file.text()));
        await recompute();
      } catch (err) {
        renderFieldErrors($("#design-form"), {
          scenario: err instanceof Error ? err.message : String(err),
        });
      } finally {
        input.value = "";
      }
    },
  );
  $("#export-csv").addEventListener("click", () => {
    if (!lastCurve) return;
    triggerDownload(
      new Blob([curveToCsv(lastCurve.points, state.sweep)], { type: "text/csv" }),
      "power-curve.csv",
    );
  });
  $("#export-png").addEventListener("click", () => {
    exportChartPng($("#chart") as unknown as SVGSVGElement, "power-curve.png");
  });
  $("#provenance-toggle").addEventListener("click", () => {
    $("#provenance").toggleAttribute("hidden");
  });
}

wire();
writeForm(state);
void recompute();
