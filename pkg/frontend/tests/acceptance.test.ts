/**
 * Secondary acceptance, run against the live engine API: a scenario reload
 * reproduces the identical report, rendered numbers match the recorded
 * response byte for byte, and switching ATE -> ATO at phi = 0.87 strictly
 * decreases the displayed N.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { buildReportView } from "../src/format.js";
import { buildReportRequest } from "../src/payload.js";
import { defaultState, parseScenario, serializeScenario } from "../src/state.js";
import type { PowerReport } from "../src/types.js";

const PORT = 8791;
const BASE = `http://127.0.0.1:${PORT}`;

let engine: ChildProcess;

async function waitForHealth(): Promise<void> {
  for (let attempt = 0; attempt < 60; attempt++) {
    try {
      const resp = await fetch(`${BASE}/api/health`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error("engine did not come up");
}

beforeAll(async () => {
  engine = spawn("python3", ["-m", "survpower.cli", "serve", "--bind",
                             `127.0.0.1:${PORT}`], { stdio: "ignore" });
  await waitForHealth();
}, 30_000);

afterAll(() => {
  engine.kill();
});

function observationalState(scheme: "ipw" | "overlap") {
  const state = defaultState();
  state.kind = "observational";
  state.phi = 0.87;
  state.scheme = scheme;
  state.seed = 11;
  return state;
}

describe("secondary acceptance (live engine)", () => {
  it("scenario save/reload reproduces the identical report", async () => {
    const client = new ApiClient(BASE);
    const state = observationalState("ipw");
    const saved = serializeScenario(state);
    const reloaded = parseScenario(saved);
    expect(reloaded).toEqual(state);

    const first = buildReportRequest(state);
    const second = buildReportRequest(reloaded);
    expect(second).toEqual(first);

    const a = await client.post<PowerReport>(first.command, first.payload);
    const b = await new ApiClient(BASE).post<PowerReport>(
      second.command, second.payload,
    );
    expect(b.text).toBe(a.text); // identical rendered report, byte for byte
  });

  it("renders every displayed number byte-for-byte from the response", async () => {
    const client = new ApiClient(BASE);
    const { command, payload } = buildReportRequest(observationalState("ipw"));
    const resp = await client.post<PowerReport>(command, payload);
    const view = buildReportView(resp);
    for (const shown of [
      view.n, view.expectedEvents, view.variance, view.achievedPower,
      view.vif ?? "", view.overlapPhi ?? "",
      ...view.comparators.map((c) => c.n),
    ]) {
      expect(resp.text).toContain(shown);
    }
    // numeric round trips agree with the parsed document
    expect(Number(view.n)).toBe(resp.doc.n);
    expect(Number(view.variance)).toBe(resp.doc.variance_units);
  });

  it("ATE -> ATO at phi = 0.87 strictly decreases the displayed N", async () => {
    const client = new ApiClient(BASE);
    const ate = buildReportRequest(observationalState("ipw"));
    const ato = buildReportRequest(observationalState("overlap"));
    const nAte = (await client.post<PowerReport>(ate.command, ate.payload)).doc.n;
    const nAto = (await new ApiClient(BASE).post<PowerReport>(
      ato.command, ato.payload,
    )).doc.n;
    expect(nAto).toBeLessThan(nAte);
  }, 30_000);

  it("surfaces the infinite-variance error with the feasibility threshold", async () => {
    const client = new ApiClient(BASE);
    const state = observationalState("ipw");
    state.phi = 0.76;
    const { command, payload } = buildReportRequest(state);
    await expect(client.post(command, payload)).rejects.toMatchObject({
      doc: { code: "infinite-variance", min_phi: expect.any(Number) },
    });
  });
});
