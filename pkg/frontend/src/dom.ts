// DOM glue: renders ViewState into the two-part layout. All counting and
// layout decisions live in layout.ts / text.ts; this file only draws.

import type { Evaluation, Frontier } from "./api.js";
import { layoutEvaluation } from "./layout.js";
import { buildTextView, labelText, METRIC_DEFINITIONS } from "./text.js";
import type { ExplorerController, ViewState } from "./state.js";

const DOT_SIZE = 7;
const DOT_GAP = 2;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function helpMark(definition: string): HTMLElement {
  const mark = el("span", "help", "?");
  mark.setAttribute("data-tip", definition);
  mark.setAttribute("title", definition);
  return mark;
}

export function renderControlPanel(
  root: HTMLElement,
  controller: ExplorerController,
  state: ViewState,
): void {
  root.replaceChildren();
  const thresholds = controller.metadata.thresholds;

  const thresholdBlock = el("div", "control-block");
  const thresholdLabel = el("label", "control-label");
  thresholdLabel.append(
    `Decision threshold: ${state.threshold.toFixed(2)} `,
    helpMark(METRIC_DEFINITIONS.threshold),
  );
  const slider = el("input") as HTMLInputElement;
  slider.type = "range";
  slider.min = "0";
  slider.max = String(thresholds.length - 1);
  slider.step = "1";
  slider.value = String(thresholds.indexOf(state.threshold));
  slider.addEventListener("change", () => {
    void controller.setThreshold(thresholds[Number(slider.value)]);
  });
  thresholdBlock.append(thresholdLabel, slider);

  const attributeBlock = el("div", "control-block");
  attributeBlock.append(el("label", "control-label", "Protected attribute"));
  const select = el("select") as HTMLSelectElement;
  const none = el("option", undefined, "none");
  none.value = "";
  select.append(none);
  for (const attribute of controller.metadata.attributes) {
    const option = el("option", undefined, attribute);
    option.value = attribute;
    select.append(option);
  }
  select.value = state.attribute ?? "";
  select.addEventListener("change", () => {
    void controller.setAttribute(select.value || null);
  });
  attributeBlock.append(select);

  root.append(thresholdBlock, attributeBlock);

  if (state.attribute && state.frontier) {
    root.append(renderParetoChart(state.frontier, state.selectedModel, controller));
  }
}

function renderParetoChart(
  frontier: Frontier,
  selectedModel: string,
  controller: ExplorerController,
): HTMLElement {
  const block = el("div", "control-block");
  block.append(
    el(
      "label",
      "control-label",
      "Errors vs disparity: click a model to select it",
    ),
  );
  const width = 280;
  const height = 200;
  const pad = 34;
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "pareto");

  const xs = frontier.points.map((p) => p.disparity);
  const ys = frontier.points.map((p) => p.errors);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const sx = (v: number) =>
    pad + (xMax === xMin ? 0.5 : (v - xMin) / (xMax - xMin)) * (width - 2 * pad);
  const sy = (v: number) =>
    height - pad - (yMax === yMin ? 0.5 : (v - yMin) / (yMax - yMin)) * (height - 2 * pad);

  const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
  path.setAttribute(
    "d",
    frontier.points.map((p, i) => `${i ? "L" : "M"}${sx(p.disparity)},${sy(p.errors)}`).join(" "),
  );
  path.setAttribute("class", "pareto-line");
  svg.append(path);

  for (const point of frontier.points) {
    const circle = document.createElementNS("http://www.w3.org/2000/svg", "circle");
    circle.setAttribute("cx", String(sx(point.disparity)));
    circle.setAttribute("cy", String(sy(point.errors)));
    circle.setAttribute("r", point.model_id === selectedModel ? "7" : "5");
    circle.setAttribute(
      "class",
      point.model_id === selectedModel ? "pareto-point selected" : "pareto-point",
    );
    const tip = document.createElementNS("http://www.w3.org/2000/svg", "title");
    tip.textContent = `${point.model_id}: ${point.errors} errors, disparity ${point.disparity}`;
    circle.append(tip);
    circle.addEventListener("click", () => void controller.selectModel(point.model_id));
    svg.append(circle);
  }

  const xLabel = document.createElementNS("http://www.w3.org/2000/svg", "text");
  xLabel.setAttribute("x", String(width / 2));
  xLabel.setAttribute("y", String(height - 6));
  xLabel.setAttribute("class", "axis-label");
  xLabel.textContent = `disparity ${xMin}..${xMax}`;
  const yLabel = document.createElementNS("http://www.w3.org/2000/svg", "text");
  yLabel.setAttribute("x", "8");
  yLabel.setAttribute("y", "14");
  yLabel.setAttribute("class", "axis-label");
  yLabel.textContent = `errors ${yMin}..${yMax}`;
  svg.append(xLabel, yLabel);

  block.append(svg);
  return block;
}

export function renderSummary(root: HTMLElement, evaluation: Evaluation): void {
  root.replaceChildren();
  const errors = el("div", "metric");
  errors.append(el("span", "metric-value", String(evaluation.errors)));
  errors.append(el("span", "metric-name", "prediction errors "));
  errors.append(helpMark(METRIC_DEFINITIONS.errors));
  root.append(errors);
  if (evaluation.disparity !== undefined) {
    const disparity = el("div", "metric");
    disparity.append(el("span", "metric-value", String(evaluation.disparity)));
    disparity.append(el("span", "metric-name", "disparity "));
    disparity.append(helpMark(METRIC_DEFINITIONS.disparity));
    root.append(disparity);
  }
}

export function renderMatrixView(root: HTMLElement, evaluation: Evaluation): void {
  root.replaceChildren();
  const grid = el("div", "quadrant-grid");
  for (const quadrant of layoutEvaluation(evaluation)) {
    const cell = el("div", quadrant.spec.correct ? "quadrant correct" : "quadrant incorrect");
    const header = el("div", "quadrant-header");
    header.append(
      el("span", "quadrant-title", quadrant.spec.title),
      el("span", "quadrant-count", String(quadrant.count)),
    );
    cell.append(header);

    const columns = quadrant.dots.reduce((m, d) => Math.max(m, d.col + 1), 1);
    const rows = quadrant.dots.reduce((m, d) => Math.max(m, d.row + 1), 1);
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute(
      "viewBox",
      `0 0 ${columns * (DOT_SIZE + DOT_GAP)} ${rows * (DOT_SIZE + DOT_GAP)}`,
    );
    svg.setAttribute("class", "dots");
    for (const dot of quadrant.dots) {
      const rect = document.createElementNS("http://www.w3.org/2000/svg", "rect");
      rect.setAttribute("x", String(dot.col * (DOT_SIZE + DOT_GAP)));
      rect.setAttribute("y", String(dot.row * (DOT_SIZE + DOT_GAP)));
      rect.setAttribute("width", String(DOT_SIZE));
      rect.setAttribute("height", String(DOT_SIZE));
      rect.setAttribute("rx", String(DOT_SIZE / 2));
      const correctness = quadrant.spec.correct ? "dot-correct" : "dot-incorrect";
      const group = dot.group === null ? "" : ` dot-group${dot.group}`;
      rect.setAttribute("class", `dot ${correctness}${group}`);
      svg.append(rect);
    }
    cell.append(svg);
    root.append(grid);
    grid.append(cell);
  }
  if (evaluation.by_group) {
    const legend = el("div", "legend");
    evaluation.by_group.labels.forEach((label, i) => {
      const item = el("span", "legend-item");
      item.append(el("span", `legend-swatch dot-group${i}`), ` ${labelText(label)}`);
      legend.append(item);
    });
    root.append(legend);
  }
}

export function renderTextView(root: HTMLElement, evaluation: Evaluation): void {
  root.replaceChildren();
  const model = buildTextView(evaluation);
  for (const section of [model.incorrect, model.correct]) {
    const block = el("section", "text-section");
    block.append(el("h3", undefined, section.heading));
    const list = el("ul");
    for (const sentence of section.sentences) {
      list.append(el("li", undefined, sentence));
    }
    block.append(list);
    root.append(block);
  }
  const summary = el("section", "text-section summary");
  for (const sentence of model.summary) {
    summary.append(el("p", undefined, sentence));
  }
  root.append(summary);
}

export function renderSelectionBar(
  root: HTMLElement,
  controller: ExplorerController,
  state: ViewState,
): void {
  root.replaceChildren();
  const rationale = el("input") as HTMLInputElement;
  rationale.type = "text";
  rationale.placeholder = "why this model? (optional)";
  rationale.id = "rationale";
  const button = el("button", "submit", state.submitting ? "Submitting..." : "Select this model");
  button.disabled = state.submitting;
  button.addEventListener("click", () => {
    void controller.submit(rationale.value || null);
  });
  root.append(el("span", "selected-model", `Model ${state.selectedModel}`), rationale, button);
  if (state.lastAck) {
    root.append(el("span", "ack", `Recorded as selection #${state.lastAck.sequence}`));
  }
}

export function renderErrorBanner(
  root: HTMLElement,
  controller: ExplorerController,
  state: ViewState,
): void {
  root.replaceChildren();
  if (!state.error) return;
  const banner = el("div", "error-banner");
  banner.append(el("span", undefined, `Request failed: ${state.error}`));
  const retry = el("button", "retry", "Retry");
  retry.addEventListener("click", () => void controller.retry());
  banner.append(retry);
  root.append(banner);
}
