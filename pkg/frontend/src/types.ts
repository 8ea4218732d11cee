/** Wire types for the /v1 analysis service (schema_version "1").
 *
 * The UI computes no statistics: every number it shows comes from these
 * response payloads verbatim.  A null height/precision means infinite
 * (zero-dispersion edge case).
 */

export interface WireStudyMass {
  id: string;
  x_position: number;
  height: number | null;
  mass_pct: number;
  hole_len: number;
  excluded: boolean;
}

export interface WireBalance {
  pivot: number;
  stand: [number, number];
  torque_residual: number;
  model_tag: string;
  studies: WireStudyMass[];
  ghost: WireBalance | null;
}

export interface PooledEstimates {
  type: "pooled";
  mu_hat: number;
  se_mu: number;
  ci_low: number;
  ci_high: number;
  ci_level: number;
  weights: number[];
}

export interface EggerEstimates {
  type: "egger";
  beta0_hat: number;
  mu_hat: number;
  phi_hat: number;
  se_beta0: number;
  se_mu: number;
  cov_beta0_mu: number;
  dof: number;
  precision_metric: string;
  sigma2_beta0: number | null;
  orientation: string | null;
  transformed: [number, number | null][];
}

export interface WireHeterogeneity {
  q: number;
  i2: number;
  tau2: number | null;
  phi: number | null;
  s2_typ: number | null;
}

export interface ResultEnvelope {
  schema_version: string;
  model: string;
  estimates: PooledEstimates | EggerEstimates;
  heterogeneity: WireHeterogeneity;
  balance: WireBalance;
}

export interface ErrorDetail {
  message: string;
  field?: string;
  row?: number;
  id?: string;
}

export interface ErrorEnvelope {
  schema_version: string;
  error: ErrorDetail;
}

/** Minimal client surface; swapped for a recorder in tests. */
export interface ServiceClient {
  post(endpoint: string, body: unknown): Promise<{ status: number; body: unknown }>;
}
