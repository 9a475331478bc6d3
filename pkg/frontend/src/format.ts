/**
 * Report view model. Every displayed number is the exact substring of the
 * response body (via the raw-literal map), so what the user sees is what the
 * engine sent, byte for byte.
 */

import type { ApiResponse } from "./api.js";
import type { PowerReport } from "./types.js";

export interface ReportView {
  n: string;
  expectedEvents: string;
  variance: string;
  achievedPower: string;
  engineVersion: string;
  vif: string | null;
  overlapCategory: string | null;
  overlapPhi: string | null;
  minPhi: string | null;
  comparators: { label: string; n: string }[];
  sensitivity: { nLow: string; nHigh: string; clamped: boolean } | null;
  /** Full response body for the provenance drawer. */
  provenance: string;
}

function rawAt(resp: ApiResponse<unknown>, path: string): string | null {
  return resp.raw.get(path) ?? null;
}

function need(resp: ApiResponse<unknown>, path: string): string {
  const got = rawAt(resp, path);
  if (got === null) throw new Error(`response is missing ${path}`);
  return got;
}

export function buildReportView(resp: ApiResponse<PowerReport>): ReportView {
  const doc = resp.doc;
  const comparators: { label: string; n: string }[] = [
    { label: "Proposed", n: need(resp, "n") },
    { label: "Schoenfeld", n: need(resp, "comparators.schoenfeld_n") },
    { label: "Freedman", n: need(resp, "comparators.freedman_n") },
  ];
  if (doc.comparators.hsieh_lavori_n !== undefined) {
    comparators.push({
      label: "Hsieh & Lavori",
      n: need(resp, "comparators.hsieh_lavori_n"),
    });
  }
  return {
    n: need(resp, "n"),
    expectedEvents: need(resp, "expected_events"),
    variance: need(resp, "variance_units"),
    achievedPower: need(resp, "achieved_power"),
    engineVersion: JSON.parse(need(resp, "engine_version")) as string,
    vif: rawAt(resp, "vif"),
    overlapCategory: doc.overlap
      ? (JSON.parse(need(resp, "overlap.category")) as string)
      : null,
    overlapPhi: rawAt(resp, "overlap.phi"),
    minPhi: rawAt(resp, "overlap.min_phi"),
    comparators,
    sensitivity: doc.sensitivity
      ? {
          nLow: need(resp, "sensitivity.n_low"),
          nHigh: need(resp, "sensitivity.n_high"),
          clamped: doc.sensitivity.clamped,
        }
      : null,
    provenance: resp.text,
  };
}
