// Single-page state machine. Each control change issues exactly one
// evaluation fetch; frontiers are cached per attribute when the attribute is
// chosen, so slider moves and Pareto clicks never need more than that one
// request. Stale responses are discarded by sequence tag.

import { ApiClient, Evaluation, Frontier, Metadata } from "./api.js";

export type ViewKind = "matrix" | "text";

export interface ViewState {
  view: ViewKind;
  attribute: string | null;
  threshold: number;
  selectedModel: string;
  evaluation: Evaluation | null;
  frontier: Frontier | null;
  loading: boolean;
  error: string | null;
  submitting: boolean;
  lastAck: { sequence: number; timestamp: string } | null;
}

type Listener = (state: ViewState) => void;

function defaultThreshold(thresholds: number[]): number {
  const half = thresholds.find((t) => t === 0.5);
  return half !== undefined ? half : thresholds[Math.floor(thresholds.length / 2)];
}

function randomSessionId(): string {
  if (typeof crypto !== "undefined" && "randomUUID" in crypto) {
    return crypto.randomUUID();
  }
  return `session-${Date.now()}-${Math.floor(Math.random() * 1e9)}`;
}

export class ExplorerController {
  readonly sessionId: string;
  private state: ViewState;
  private listeners: Listener[] = [];
  private fetchSeq = 0;
  private frontierCache = new Map<string, Map<number, Frontier>>();
  private lastAction: (() => Promise<void>) | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly metadata: Metadata,
    sessionId?: string,
  ) {
    this.sessionId = sessionId ?? randomSessionId();
    this.state = {
      view: "matrix",
      attribute: null,
      threshold: defaultThreshold(metadata.thresholds),
      selectedModel: metadata.unweighted_model_id,
      evaluation: null,
      frontier: null,
      loading: false,
      error: null,
      submitting: false,
      lastAck: null,
    };
  }

  getState(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private update(partial: Partial<ViewState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Snap an arbitrary slider value to the served grid. */
  snapThreshold(value: number): number {
    let best = this.metadata.thresholds[0];
    for (const t of this.metadata.thresholds) {
      if (Math.abs(t - value) < Math.abs(best - value)) best = t;
    }
    return best;
  }

  async init(): Promise<void> {
    await this.refetchEvaluation();
  }

  /** Re-issue the last failed action; controls stay usable meanwhile. */
  async retry(): Promise<void> {
    if (this.lastAction) await this.lastAction();
    else await this.refetchEvaluation();
  }

  async setView(view: ViewKind): Promise<void> {
    if (view !== this.state.view) this.update({ view });
  }

  async setThreshold(raw: number): Promise<void> {
    const threshold = this.snapThreshold(raw);
    if (threshold === this.state.threshold) return;
    const frontier = this.state.attribute
      ? this.cachedFrontier(this.state.attribute, threshold)
      : null;
    const selectedModel = frontier
      ? this.snapSelection(frontier)
      : this.metadata.unweighted_model_id;
    this.update({ threshold, frontier, selectedModel });
    this.lastAction = () => this.refetchEvaluation();
    await this.refetchEvaluation();
  }

  async setAttribute(attribute: string | null): Promise<void> {
    if (attribute === this.state.attribute) return;
    if (attribute === null) {
      this.update({
        attribute: null,
        frontier: null,
        selectedModel: this.metadata.unweighted_model_id,
      });
      this.lastAction = () => this.refetchEvaluation();
      await this.refetchEvaluation();
      return;
    }
    this.lastAction = () => this.setAttributeUncached(attribute);
    await this.setAttributeUncached(attribute);
  }

  private async setAttributeUncached(attribute: string): Promise<void> {
    this.update({ loading: true, error: null });
    try {
      await this.loadFrontiers(attribute);
    } catch (error) {
      this.update({ loading: false, error: describe(error) });
      return;
    }
    const frontier = this.cachedFrontier(attribute, this.state.threshold);
    this.update({
      attribute,
      frontier,
      selectedModel: frontier ? this.snapSelection(frontier) : this.state.selectedModel,
    });
    await this.refetchEvaluation();
  }

  async selectModel(modelId: string): Promise<void> {
    if (this.state.frontier && !this.state.frontier.points.some((p) => p.model_id === modelId)) {
      return; // only frontier models are selectable while an attribute is shown
    }
    if (modelId === this.state.selectedModel) return;
    this.update({ selectedModel: modelId });
    this.lastAction = () => this.refetchEvaluation();
    await this.refetchEvaluation();
  }

  async submit(rationale: string | null): Promise<{ sequence: number } | null> {
    if (this.state.submitting) return null; // double-submit guard
    this.update({ submitting: true, error: null });
    try {
      const ack = await this.api.postSelection({
        session_id: this.sessionId,
        model_id: this.state.selectedModel,
        threshold: this.state.threshold,
        view: this.state.view,
        attribute: this.state.attribute,
        rationale,
      });
      this.update({ submitting: false, lastAck: ack });
      return ack;
    } catch (error) {
      this.update({ submitting: false, error: describe(error) });
      return null;
    }
  }

  private cachedFrontier(attribute: string, threshold: number): Frontier | null {
    return this.frontierCache.get(attribute)?.get(threshold) ?? null;
  }

  private async loadFrontiers(attribute: string): Promise<void> {
    if (this.frontierCache.has(attribute)) return;
    const entries = await Promise.all(
      this.metadata.thresholds.map(async (t) => {
        const frontier = await this.api.getFrontier(attribute, t);
        return [t, frontier] as const;
      }),
    );
    this.frontierCache.set(attribute, new Map(entries));
  }

  /** Keep the selected model if it is still on the frontier, otherwise move
   *  to the point whose disparity is closest to the previous selection. */
  private snapSelection(frontier: Frontier): string {
    const current = frontier.points.find((p) => p.model_id === this.state.selectedModel);
    if (current) return current.model_id;
    const previous = this.state.evaluation?.disparity ?? 0;
    let best = frontier.points[0];
    for (const p of frontier.points) {
      if (Math.abs(p.disparity - previous) < Math.abs(best.disparity - previous)) best = p;
    }
    return best.model_id;
  }

  private async refetchEvaluation(): Promise<void> {
    const seq = ++this.fetchSeq;
    const { selectedModel, threshold, attribute } = this.state;
    this.update({ loading: true, error: null });
    try {
      const evaluation = await this.api.getEvaluation(selectedModel, threshold, attribute);
      if (seq !== this.fetchSeq) return; // a newer interaction superseded this one
      this.update({ evaluation, loading: false });
    } catch (error) {
      if (seq !== this.fetchSeq) return;
      this.update({ loading: false, error: describe(error) });
    }
  }
}

function describe(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}
