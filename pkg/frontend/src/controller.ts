/** View-state machine: control panel -> one service request -> new state.
 *
 * Contracts honoured here:
 *  - the control state always round-trips to a valid analysis request;
 *  - every user action issues exactly one service request;
 *  - at most one request is authoritative: responses carry a sequence
 *    number and stale ones are discarded;
 *  - on success the previous balance becomes the ghost (grey stand);
 *  - failures leave the rendered numbers unchanged (controls roll back),
 *    a 400 surfaces its machine detail inline, a transport error shows a
 *    retriable banner.
 */

import type {
  ErrorEnvelope,
  ResultEnvelope,
  ServiceClient,
  WireBalance,
} from "./types.js";

export type ModelChoice = "fixed" | "re_additive" | "re_multiplicative";
export type Tau2Method = "dl" | "pm";
export type Metric = "inv_se" | "inv_n";

export interface Controls {
  model: ModelChoice;
  tau2Method: Tau2Method;
  excludedIds: readonly string[];
  eggerOn: boolean;
  metric: Metric;
}

export interface DatasetRef {
  format: "csv" | "json";
  content: string;
}

export type UserAction =
  | { kind: "load_dataset"; dataset: DatasetRef }
  | { kind: "set_model"; model: ModelChoice; tau2Method?: Tau2Method }
  | { kind: "toggle_exclusion"; id: string }
  | { kind: "toggle_egger" }
  | { kind: "set_metric"; metric: Metric };

export type AnimationPhase = "idle" | "pending" | "animating";

export interface ViewError {
  message: string;
  retriable: boolean;
  field?: string;
}

export interface ViewState {
  dataset: DatasetRef | null;
  controls: Controls;
  current: ResultEnvelope | null;
  ghost: WireBalance | null;
  phase: AnimationPhase;
  error: ViewError | null;
}

export const DEFAULT_CONTROLS: Controls = {
  model: "fixed",
  tau2Method: "pm",
  excludedIds: [],
  eggerOn: false,
  metric: "inv_se",
};

export const ANIMATION_MS = 300;

/** The model tag sent on the wire for the current pooling controls. */
export function modelTag(c: Controls): string {
  if (c.model === "re_additive") {
    return `re_additive_${c.tau2Method}`;
  }
  return c.model;
}

export interface AnalysisCall {
  endpoint: "/v1/analyze" | "/v1/egger";
  body: Record<string, unknown>;
}

/** Control state -> the one request it denotes (always valid). */
export function buildCall(c: Controls, dataset: DatasetRef): AnalysisCall {
  const options: Record<string, unknown> = { ci_level: 0.95 };
  if (c.excludedIds.length > 0) {
    options["exclude_ids"] = [...c.excludedIds];
  }
  if (c.eggerOn) {
    options["precision_metric"] = c.metric;
    return {
      endpoint: "/v1/egger",
      body: { dataset: { ...dataset }, options },
    };
  }
  return {
    endpoint: "/v1/analyze",
    body: { dataset: { ...dataset }, model: modelTag(c), options },
  };
}

function applyAction(controls: Controls, action: UserAction): Controls {
  switch (action.kind) {
    case "load_dataset":
      return controls;
    case "set_model":
      return {
        ...controls,
        model: action.model,
        tau2Method: action.tau2Method ?? controls.tau2Method,
      };
    case "toggle_exclusion": {
      const has = controls.excludedIds.includes(action.id);
      const next = has
        ? controls.excludedIds.filter((i) => i !== action.id)
        : [...controls.excludedIds, action.id].sort();
      return { ...controls, excludedIds: next };
    }
    case "toggle_egger":
      return { ...controls, eggerOn: !controls.eggerOn };
    case "set_metric":
      return { ...controls, metric: action.metric };
  }
}

function errorFrom(status: number, body: unknown): ViewError {
  const detail = (body as ErrorEnvelope | null)?.error;
  if (detail && typeof detail.message === "string") {
    return { message: detail.message, retriable: false, field: detail.field };
  }
  return { message: `service error (status ${status})`, retriable: false };
}

export class BalanceController {
  state: ViewState;
  private seq = 0;
  private lastAction: UserAction | null = null;
  private animationTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly client: ServiceClient,
    private readonly onChange: (state: ViewState) => void = () => {},
    private readonly animate: boolean = true,
  ) {
    this.state = {
      dataset: null,
      controls: DEFAULT_CONTROLS,
      current: null,
      ghost: null,
      phase: "idle",
      error: null,
    };
  }

  /** Re-issue the last action after a transport failure. */
  async retry(): Promise<void> {
    if (this.lastAction) {
      await this.dispatch(this.lastAction);
    }
  }

  async dispatch(action: UserAction): Promise<void> {
    this.lastAction = action;
    const prevControls = this.state.controls;
    const prevDataset = this.state.dataset;

    const dataset =
      action.kind === "load_dataset" ? action.dataset : this.state.dataset;
    if (!dataset) {
      this.update({ error: { message: "load a dataset first", retriable: false } });
      return;
    }
    const controls = applyAction(this.state.controls, action);
    const call = buildCall(controls, dataset);
    const mySeq = ++this.seq;
    this.update({ controls, dataset, phase: "pending", error: null });

    let status: number;
    let body: unknown;
    try {
      ({ status, body } = await this.client.post(call.endpoint, call.body));
    } catch (exc) {
      if (mySeq !== this.seq) return; // superseded
      this.update({
        controls: prevControls,
        dataset: prevDataset,
        phase: "idle",
        error: {
          message: `service unreachable: ${String(exc)}`,
          retriable: true,
        },
      });
      return;
    }
    if (mySeq !== this.seq) return; // a newer request owns the view

    if (status !== 200) {
      this.update({
        controls: prevControls,
        dataset: prevDataset,
        phase: "idle",
        error: errorFrom(status, body),
      });
      return;
    }
    const envelope = body as ResultEnvelope;
    const ghost = this.state.current ? this.state.current.balance : null;
    this.update({
      current: envelope,
      ghost,
      phase: this.animate ? "animating" : "idle",
      error: null,
    });
    if (this.animate) {
      if (this.animationTimer) clearTimeout(this.animationTimer);
      this.animationTimer = setTimeout(() => {
        if (this.state.phase === "animating") {
          this.update({ phase: "idle" });
        }
      }, ANIMATION_MS);
    }
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.state);
  }
}
