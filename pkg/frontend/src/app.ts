/** Browser bootstrap: wires the controller, renderer and HTTP client. */

import { httpClient } from "./client.js";
import { BalanceController } from "./controller.js";
import type { RenderHooks } from "./render.js";
import { renderApp } from "./render.js";
import type { ServiceClient } from "./types.js";

export const SAMPLE = `id,y,se
trial_1,-1.21,0.32
trial_2,-0.35,0.4
trial_3,0.85,0.3
trial_4,-1.34,0.97
trial_5,-0.59,0.6
trial_6,-1.8,0.66
trial_7,-0.75,0.38
trial_8,-0.53,0.24
`;

/** Wire a controller to a root element; the client is injectable for tests. */
export function createUi(
  root: HTMLElement,
  client: ServiceClient,
  animate = true,
): BalanceController {
  const hooks: RenderHooks = {
    onLoadDataset: (content) =>
      void controller.dispatch({
        kind: "load_dataset",
        dataset: { format: "csv", content },
      }),
    onSetModel: (model) =>
      void controller.dispatch({
        kind: "set_model",
        model: model as never,
      }),
    onSetTau2: (method) =>
      void controller.dispatch({
        kind: "set_model",
        model: "re_additive",
        tau2Method: method as never,
      }),
    onToggleExclusion: (id) =>
      void controller.dispatch({ kind: "toggle_exclusion", id }),
    onToggleEgger: () => void controller.dispatch({ kind: "toggle_egger" }),
    onSetMetric: (metric) =>
      void controller.dispatch({
        kind: "set_metric",
        metric: metric as never,
      }),
    onRetry: () => void controller.retry(),
  };
  const controller = new BalanceController(
    client,
    (state) => renderApp(root, state, hooks),
    animate,
  );
  renderApp(root, controller.state, hooks);
  return controller;
}

export function mount(root: HTMLElement, baseUrl = ""): BalanceController {
  const controller = createUi(root, httpClient(baseUrl));
  void controller.dispatch({
    kind: "load_dataset",
    dataset: { format: "csv", content: SAMPLE },
  });
  return controller;
}

const rootEl = typeof document !== "undefined"
  ? document.getElementById("root")
  : null;
if (rootEl) {
  mount(rootEl);
}
