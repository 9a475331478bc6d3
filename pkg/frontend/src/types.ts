/** Wire types mirroring the engine's JSON documents. */

export type StudyKind = "rct" | "observational";
export type Scheme = "ipw" | "overlap" | "treated";
export type SweepAxis = "n" | "phi" | "hr";

export interface SensitivityState {
  enabled: boolean;
  rho1: number;
  rho0: number;
  gammaEnabled: boolean;
  gamma: number;
}

/** Everything the form holds; the single source of truth for a scenario. */
export interface CalculatorState {
  kind: StudyKind;
  r: number;
  hr: number;
  armSpecificRates: boolean;
  d: number;
  d1: number;
  d0: number;
  alpha: number;
  power: number;
  sides: 1 | 2;
  phi: number;
  scheme: Scheme;
  seed: number;
  sensitivity: SensitivityState;
  sweep: SweepAxis;
}

export interface PowerReport {
  inputs: Record<string, unknown>;
  variance_units: number;
  n: number;
  expected_events: number;
  achieved_power: number;
  vif?: number;
  vif_mc_std_error?: number;
  overlap?: {
    phi: number;
    category: string;
    a: number;
    b: number;
    min_phi: number;
  };
  comparators: {
    schoenfeld_n: number;
    freedman_n: number;
    hsieh_lavori_n?: number;
  };
  sensitivity?: {
    rho1: number;
    rho0: number;
    gamma: number | null;
    bound: number;
    n_low: number;
    n_high: number;
    clamped: boolean;
  };
  engine_version: string;
  seed?: number;
}

export interface CurvePoint {
  phi?: number;
  hr?: number;
  n: number;
  power: number;
}

export interface CurveReport {
  inputs: Record<string, unknown>;
  points: CurvePoint[];
  engine_version: string;
}

export interface ErrorDocument {
  code: string;
  message: string;
  offending_field: string | null;
  min_phi?: number;
}
