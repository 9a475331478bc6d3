import { describe, expect, it } from "vitest";

import {
  defaultState,
  parseScenario,
  serializeScenario,
  validateState,
} from "../src/state.js";

describe("scenario round trip", () => {
  it("serialize -> parse is the identity", () => {
    const state = defaultState();
    state.kind = "observational";
    state.phi = 0.87;
    state.scheme = "overlap";
    state.sensitivity = {
      enabled: true,
      rho1: 0.7,
      rho0: 0.4,
      gammaEnabled: true,
      gamma: 0.25,
    };
    expect(parseScenario(serializeScenario(state))).toEqual(state);
  });

  it("rejects unknown versions and invalid states", () => {
    expect(() => parseScenario('{"version":99,"state":{}}')).toThrow(/version/);
    const bad = defaultState();
    bad.r = 1.5;
    expect(() => parseScenario(serializeScenario(bad))).toThrow(/validation/);
  });
});

describe("validateState", () => {
  it("accepts the defaults", () => {
    expect(validateState(defaultState())).toEqual({});
  });

  it("flags the same bounds as the engine's design inputs", () => {
    const state = defaultState();
    state.r = 0;
    state.hr = -1;
    state.d = 1.2;
    state.power = 0.04;
    const errors = validateState(state);
    expect(Object.keys(errors).sort()).toEqual(["d", "hr", "power", "r"]);
  });

  it("checks observational fields only in observational mode", () => {
    const state = defaultState();
    state.phi = 1.2;
    expect(validateState(state)).toEqual({});
    state.kind = "observational";
    expect(validateState(state)).toHaveProperty("phi");
  });

  it("requires power above alpha", () => {
    const state = defaultState();
    state.alpha = 0.5;
    state.power = 0.3;
    expect(validateState(state)).toHaveProperty("power");
  });

  it("bounds the sensitivity inputs when enabled", () => {
    const state = defaultState();
    state.kind = "observational";
    state.sensitivity.enabled = true;
    state.sensitivity.rho1 = 1.4;
    state.sensitivity.gammaEnabled = true;
    state.sensitivity.gamma = 0;
    const errors = validateState(state);
    expect(errors).toHaveProperty("rho1");
    expect(errors).toHaveProperty("gamma");
  });
});
