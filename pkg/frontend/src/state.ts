/** Calculator state: defaults, validation, and scenario (de)serialization. */

import type { CalculatorState } from "./types.js";

export const SCENARIO_VERSION = 1;

export function defaultState(): CalculatorState {
  return {
    kind: "rct",
    r: 0.5,
    hr: 0.6,
    armSpecificRates: false,
    d: 1.0,
    d1: 1.0,
    d0: 1.0,
    alpha: 0.05,
    power: 0.8,
    sides: 1,
    phi: 0.9,
    scheme: "ipw",
    seed: 0,
    sensitivity: {
      enabled: false,
      rho1: 0.5,
      rho0: 0.5,
      gammaEnabled: false,
      gamma: 0.2,
    },
    sweep: "n",
  };
}

const inOpen = (x: number, lo: number, hi: number) => x > lo && x < hi;
const isRate = (x: number) => x > 0 && x <= 1;

/**
 * Client-side validation mirroring the engine's design-input bounds; returns
 * a field -> message map, empty when the form is submittable.
 */
export function validateState(state: CalculatorState): Record<string, string> {
  const errors: Record<string, string> = {};
  if (!inOpen(state.r, 0, 1)) errors.r = "treatment proportion must be in (0, 1)";
  if (!(state.hr > 0)) errors.hr = "hazard ratio must be positive";
  else if (state.hr === 1) errors.hr = "hazard ratio 1 has no finite sample size";
  if (state.armSpecificRates) {
    if (!isRate(state.d1)) errors.d1 = "treated event rate must be in (0, 1]";
    if (!isRate(state.d0)) errors.d0 = "control event rate must be in (0, 1]";
  } else if (!isRate(state.d)) {
    errors.d = "event rate must be in (0, 1]";
  }
  if (!inOpen(state.alpha, 0, 1)) errors.alpha = "alpha must be in (0, 1)";
  if (!inOpen(state.power, 0, 1)) errors.power = "power must be in (0, 1)";
  else if (state.power <= state.alpha) errors.power = "power must exceed alpha";
  if (state.sides !== 1 && state.sides !== 2) errors.sides = "sides is 1 or 2";
  if (state.kind === "observational") {
    if (!inOpen(state.phi, 0, 1)) errors.phi = "overlap must be in (0, 1)";
    const s = state.sensitivity;
    if (s.enabled) {
      if (!(s.rho1 >= 0 && s.rho1 <= 1)) errors.rho1 = "rho1 must be in [0, 1]";
      if (!(s.rho0 >= 0 && s.rho0 <= 1)) errors.rho0 = "rho0 must be in [0, 1]";
      if (s.gammaEnabled && !inOpen(s.gamma, 0, 1)) {
        errors.gamma = "gamma must be in (0, 1)";
      }
    }
  }
  return errors;
}

export function serializeScenario(state: CalculatorState): string {
  return JSON.stringify({ version: SCENARIO_VERSION, state }, null, 2);
}

/** Parse a saved scenario; throws on version or shape mismatches. */
export function parseScenario(text: string): CalculatorState {
  const doc = JSON.parse(text) as { version?: number; state?: unknown };
  if (doc.version !== SCENARIO_VERSION) {
    throw new Error(`unsupported scenario version ${String(doc.version)}`);
  }
  const base = defaultState();
  const raw = doc.state as Record<string, unknown>;
  if (typeof raw !== "object" || raw === null) {
    throw new Error("scenario has no state object");
  }
  const state = { ...base, ...raw, sensitivity: { ...base.sensitivity } } as CalculatorState;
  if (typeof raw.sensitivity === "object" && raw.sensitivity !== null) {
    state.sensitivity = { ...base.sensitivity, ...(raw.sensitivity as object) };
  }
  const errors = validateState(state);
  const bad = Object.keys(errors);
  if (bad.length > 0) {
    throw new Error(`scenario fails validation: ${bad.join(", ")}`);
  }
  return state;
}
