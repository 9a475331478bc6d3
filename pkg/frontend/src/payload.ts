/** Build engine request payloads from the calculator state. */

import type { CalculatorState, SweepAxis } from "./types.js";

export interface Request {
  command: "rct" | "obs" | "curve";
  payload: Record<string, unknown>;
}

function designFields(state: CalculatorState): Record<string, unknown> {
  const base: Record<string, unknown> = {
    r: state.r,
    hr: state.hr,
    alpha: state.alpha,
    power: state.power,
    sides: state.sides,
  };
  if (state.armSpecificRates) {
    base.d1 = state.d1;
    base.d0 = state.d0;
  } else {
    base.d = state.d;
  }
  return base;
}

/** The main report request: rct or obs depending on the study kind. */
export function buildReportRequest(state: CalculatorState): Request {
  if (state.kind === "rct") {
    return { command: "rct", payload: designFields(state) };
  }
  const payload = { ...designFields(state), phi: state.phi, scheme: state.scheme };
  if (state.scheme !== "ipw") {
    (payload as Record<string, unknown>).seed = state.seed;
  }
  if (state.scheme === "ipw" && state.sensitivity.enabled) {
    (payload as Record<string, unknown>).rho1 = state.sensitivity.rho1;
    (payload as Record<string, unknown>).rho0 = state.sensitivity.rho0;
    if (state.sensitivity.gammaEnabled) {
      (payload as Record<string, unknown>).gamma = state.sensitivity.gamma;
    }
  }
  return { command: "obs", payload };
}

/** Sweep ranges: n brackets the reported size, hr approaches the null from
 * below (the axis is capped there: the size diverges at hr = 1), phi spans
 * the practically relevant overlap band. */
export function buildCurveRequest(
  state: CalculatorState,
  sweep: SweepAxis,
  lastN: number | null,
): Request {
  const payload: Record<string, unknown> = {
    ...designFields(state),
    sweep,
    points: 25,
  };
  if (state.kind === "observational") payload.phi = state.phi;
  if (sweep === "n") {
    const center = lastN ?? 100;
    payload.from = Math.max(2, Math.round(center * 0.25));
    payload.to = Math.max(payload.from as number + 10, Math.round(center * 2));
  } else if (sweep === "phi") {
    payload.from = 0.85;
    payload.to = 0.99;
  } else {
    payload.from = Math.min(state.hr, 0.9) * 0.5;
    payload.to = 0.95; // cap short of hr = 1, where N diverges
  }
  return { command: "curve", payload };
}
