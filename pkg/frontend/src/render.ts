/** DOM rendering: controls, served-number readouts, and the SVG balance.
 *
 * Every displayed number is copied from the service response (exposed
 * in data-* attributes for inspection); the pivot marker slides between
 * the ghost and current positions with a CSS transition, which is
 * purely cosmetic.  All controls are native form elements, hence
 * keyboard operable, and are disabled while a request is pending.
 */

import type { ViewState } from "./controller.js";
import { buildScene } from "./scene.js";
import type { EggerEstimates, PooledEstimates, ResultEnvelope } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface RenderHooks {
  onLoadDataset: (content: string) => void;
  onSetModel: (model: string) => void;
  onSetTau2: (method: string) => void;
  onToggleExclusion: (id: string) => void;
  onToggleEgger: () => void;
  onSetMetric: (metric: string) => void;
  onRetry: () => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl(tag: string, attrs: Record<string, string>): Element {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function numText(v: number | null | undefined, digits = 4): string {
  if (v === null || v === undefined) return "-";
  return Number(v).toFixed(digits);
}

function readout(label: string, field: string, value: string): HTMLElement {
  const wrap = el("div", { class: "readout" });
  wrap.appendChild(el("span", { class: "readout-label" }, label));
  const span = el("span", { class: "readout-value", "data-field": field }, value);
  wrap.appendChild(span);
  return wrap;
}

function renderReadouts(envelope: ResultEnvelope): HTMLElement {
  const panel = el("section", { class: "readouts", "aria-label": "estimates" });
  const est = envelope.estimates;
  const het = envelope.heterogeneity;
  panel.appendChild(readout("model", "model", envelope.model));
  if (est.type === "egger") {
    const e = est as EggerEstimates;
    panel.appendChild(readout("bias b0", "beta0_hat", numText(e.beta0_hat)));
    panel.appendChild(readout("se(b0)", "se_beta0", numText(e.se_beta0)));
    panel.appendChild(readout("adjusted mu", "mu_hat", numText(e.mu_hat)));
    panel.appendChild(readout("se(mu)", "se_mu", numText(e.se_mu)));
    panel.appendChild(readout("dispersion phi", "phi_hat", numText(e.phi_hat)));
    panel.appendChild(readout(
      "pleiotropy var", "sigma2_beta0",
      e.sigma2_beta0 === null ? "not identified" : numText(e.sigma2_beta0)));
  } else {
    const p = est as PooledEstimates;
    panel.appendChild(readout("mu", "mu_hat", numText(p.mu_hat)));
    panel.appendChild(readout("se(mu)", "se_mu", numText(p.se_mu)));
    panel.appendChild(readout("ci low", "ci_low", numText(p.ci_low)));
    panel.appendChild(readout("ci high", "ci_high", numText(p.ci_high)));
  }
  panel.appendChild(readout("Q", "q", numText(het.q)));
  panel.appendChild(readout("I2", "i2", numText(het.i2)));
  if (het.tau2 !== null) {
    panel.appendChild(readout("tau2", "tau2", numText(het.tau2)));
  }
  if (het.phi !== null) {
    panel.appendChild(readout("phi", "phi", numText(het.phi)));
  }
  return panel;
}

function renderControls(state: ViewState, hooks: RenderHooks): HTMLElement {
  const c = state.controls;
  const pending = state.phase === "pending";
  const form = el("form", { class: "controls", "aria-label": "analysis controls" });
  form.addEventListener("submit", (ev) => ev.preventDefault());

  const dsLabel = el("label", { for: "dataset-input" }, "dataset (CSV: id,y,se[,n])");
  const dsInput = el("textarea", { id: "dataset-input", rows: "5" });
  if (state.dataset) dsInput.value = state.dataset.content;
  const loadBtn = el("button", { type: "button", id: "load-btn" }, "Load");
  loadBtn.addEventListener("click", () => hooks.onLoadDataset(dsInput.value));

  const modelLabel = el("label", { for: "model-select" }, "model");
  const modelSel = el("select", { id: "model-select" });
  for (const m of ["fixed", "re_additive", "re_multiplicative"]) {
    const opt = el("option", { value: m }, m);
    if (m === c.model) opt.setAttribute("selected", "selected");
    modelSel.appendChild(opt);
  }
  modelSel.addEventListener("change", () => hooks.onSetModel(modelSel.value));

  const tau2Label = el("label", { for: "tau2-select" }, "tau2 estimator");
  const tau2Sel = el("select", { id: "tau2-select" });
  for (const m of ["pm", "dl"]) {
    const opt = el("option", { value: m }, m);
    if (m === c.tau2Method) opt.setAttribute("selected", "selected");
    tau2Sel.appendChild(opt);
  }
  if (c.model !== "re_additive") tau2Sel.setAttribute("disabled", "disabled");
  tau2Sel.addEventListener("change", () => hooks.onSetTau2(tau2Sel.value));

  const metricLabel = el("label", { for: "metric-select" }, "precision metric");
  const metricSel = el("select", { id: "metric-select" });
  for (const m of ["inv_se", "inv_n"]) {
    const opt = el("option", { value: m }, m);
    if (m === c.metric) opt.setAttribute("selected", "selected");
    metricSel.appendChild(opt);
  }
  metricSel.addEventListener("change", () => hooks.onSetMetric(metricSel.value));

  const eggerWrap = el("label", { for: "egger-toggle", class: "egger-label" },
                       "bias adjustment (Egger)");
  const eggerBox = el("input", { type: "checkbox", id: "egger-toggle" });
  (eggerBox as HTMLInputElement).checked = c.eggerOn;
  eggerBox.addEventListener("change", () => hooks.onToggleEgger());
  eggerWrap.prepend(eggerBox);

  for (const node of [dsLabel, dsInput, loadBtn, modelLabel, modelSel,
                      tau2Label, tau2Sel, metricLabel, metricSel, eggerWrap]) {
    form.appendChild(node);
  }
  if (pending) {
    for (const node of form.querySelectorAll("button, select, input, textarea")) {
      node.setAttribute("disabled", "disabled");
    }
  }
  return form;
}

function renderStudyList(state: ViewState, hooks: RenderHooks): HTMLElement {
  const wrap = el("section", { class: "studies", "aria-label": "studies" });
  if (!state.current) return wrap;
  const pending = state.phase === "pending";
  for (const m of state.current.balance.studies) {
    const row = el("label", { class: "study-row", for: `exclude-${m.id}` });
    const box = el("input", {
      type: "checkbox",
      id: `exclude-${m.id}`,
      "data-study": m.id,
    });
    (box as HTMLInputElement).checked = !m.excluded;
    if (pending) box.setAttribute("disabled", "disabled");
    box.addEventListener("change", () => hooks.onToggleExclusion(m.id));
    row.appendChild(box);
    row.appendChild(el(
      "span",
      { "data-study-label": m.id },
      `${m.id}: x=${numText(m.x_position, 3)} mass=${numText(m.mass_pct, 2)}%`,
    ));
    wrap.appendChild(row);
  }
  return wrap;
}

function renderSvg(state: ViewState): Element {
  const envelope = state.current!;
  const scene = buildScene(envelope.balance, state.ghost);
  const svg = svgEl("svg", {
    viewBox: `0 0 ${scene.width} ${scene.height}`,
    width: String(scene.width),
    height: String(scene.height),
    role: "img",
    "aria-label": `balance for model ${scene.modelTag}`,
    "data-model": scene.modelTag,
    "data-torque-residual": String(scene.torqueResidual),
  });

  // pole
  svg.appendChild(svgEl("line", {
    x1: "20", x2: String(scene.width - 20),
    y1: String(scene.poleY), y2: String(scene.poleY),
    class: "pole", stroke: "#444", "stroke-width": "3",
  }));
  // ground
  svg.appendChild(svgEl("line", {
    x1: "0", x2: String(scene.width),
    y1: String(scene.groundY), y2: String(scene.groundY),
    stroke: "#999", "stroke-width": "1",
  }));

  if (scene.ghostStand) {
    const g = scene.ghostStand;
    const ghost = svgEl("g", {
      class: "ghost-stand",
      "data-ghost-pivot": String(g.dataPivot),
      "data-ghost-low": String(g.dataLow),
      "data-ghost-high": String(g.dataHigh),
    });
    ghost.appendChild(svgEl("line", {
      x1: String(g.x0), x2: String(g.x1),
      y1: String(scene.groundY), y2: String(scene.groundY),
      stroke: "#bbb", "stroke-width": "6",
    }));
    ghost.appendChild(svgEl("line", {
      x1: String(g.pivotX), x2: String(g.pivotX),
      y1: String(scene.poleY), y2: String(scene.groundY),
      stroke: "#bbb", "stroke-width": "2", "stroke-dasharray": "4 3",
    }));
    svg.appendChild(ghost);
  }

  for (const m of scene.masses) {
    const g = svgEl("g", {
      class: m.raw.excluded ? "mass excluded" : "mass",
      "data-id": m.raw.id,
      "data-x-position": String(m.raw.x_position),
      "data-height": m.raw.height === null ? "inf" : String(m.raw.height),
      "data-mass-pct": String(m.raw.mass_pct),
      "data-hole-len": String(m.raw.hole_len),
      "data-excluded": String(m.raw.excluded),
    });
    // cord from the pole down to the mass
    g.appendChild(svgEl("line", {
      x1: String(m.cx), x2: String(m.cx),
      y1: String(scene.poleY), y2: String(m.cy),
      stroke: m.raw.excluded ? "#ccc" : "#888", "stroke-width": "1",
    }));
    g.appendChild(svgEl("rect", {
      x: String(m.cx - m.side / 2), y: String(m.cy - m.side / 2),
      width: String(m.side), height: String(m.side),
      fill: m.raw.excluded ? "#c8c8c8" : "#3a6ea5",
      stroke: "#222", "stroke-width": "1",
    }));
    if (m.holeSide > 0) {
      g.appendChild(svgEl("rect", {
        class: "hole",
        x: String(m.cx - m.holeSide / 2), y: String(m.cy - m.holeSide / 2),
        width: String(m.holeSide), height: String(m.holeSide),
        fill: "#ffffff", stroke: "#222", "stroke-width": "0.5",
      }));
    }
    const title = svgEl("title", {});
    title.textContent = `${m.raw.id}: x=${m.raw.x_position}, `
      + `mass=${m.raw.mass_pct}%, hole=${m.raw.hole_len}`;
    g.appendChild(title);
    svg.appendChild(g);
  }

  const s = scene.stand;
  const stand = svgEl("g", {
    class: "stand",
    "data-pivot": String(s.dataPivot),
    "data-stand-low": String(s.dataLow),
    "data-stand-high": String(s.dataHigh),
  });
  stand.appendChild(svgEl("line", {
    x1: String(s.x0), x2: String(s.x1),
    y1: String(scene.groundY), y2: String(scene.groundY),
    stroke: "#111", "stroke-width": "6",
  }));
  const pivotLine = svgEl("line", {
    class: "pivot",
    x1: String(s.pivotX), x2: String(s.pivotX),
    y1: String(scene.poleY), y2: String(scene.groundY),
    stroke: "#c0392b", "stroke-width": "2",
  });
  // cosmetic slide from the ghost pivot into place
  (pivotLine as SVGElement).setAttribute(
    "style", "transition: transform 0.3s ease-out;");
  stand.appendChild(pivotLine);
  svg.appendChild(stand);
  return svg;
}

export function renderApp(
  root: HTMLElement,
  state: ViewState,
  hooks: RenderHooks,
): void {
  root.textContent = "";
  root.appendChild(el("h1", {}, "Meta-Analyzer"));

  if (state.error) {
    const banner = el("div", { class: "banner", role: "alert" },
                      state.error.message);
    if (state.error.retriable) {
      const retry = el("button", { type: "button", id: "retry-btn" }, "Retry");
      retry.addEventListener("click", () => hooks.onRetry());
      banner.appendChild(retry);
    }
    root.appendChild(banner);
  }
  if (state.phase === "pending") {
    root.appendChild(el("div", { class: "pending", role: "status" },
                        "analyzing..."));
  }

  root.appendChild(renderControls(state, hooks));
  if (state.current) {
    root.appendChild(renderReadouts(state.current));
    root.appendChild(renderStudyList(state, hooks));
    root.appendChild(renderSvg(state) as unknown as HTMLElement);
  }
}
