// Typed client for the model-family service. The explorer talks to these
// endpoints and nothing else.

export interface Counts {
  tp: number;
  fp: number;
  fn: number;
  tn: number;
}

export interface GroupCounts {
  labels: string[];
  a0: Counts;
  a1: Counts;
}

export interface Metadata {
  schema_version: number;
  attributes: string[];
  thresholds: number[];
  group_labels: Record<string, string[]>;
  dataset: Record<string, unknown>;
  eval_scope: string;
  unweighted_model_id: string;
  test_accuracy: number;
}

export interface FrontierPoint {
  model_id: string;
  alpha: number;
  beta: number;
  errors: number;
  disparity: number;
}

export interface Frontier {
  attribute: string;
  threshold: number;
  points: FrontierPoint[];
}

export interface Evaluation {
  model_id: string;
  threshold: number;
  overall: Counts;
  errors: number;
  attribute?: string;
  by_group?: GroupCounts;
  disparity?: number;
}

export interface SelectionRequest {
  session_id: string;
  model_id: string;
  threshold: number;
  view: "matrix" | "text";
  attribute: string | null;
  rationale: string | null;
}

export interface SelectionAck {
  sequence: number;
  timestamp: string;
}

interface ErrorBody {
  error?: string;
  detail?: unknown;
  valid_values?: unknown;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ErrorBody,
  ) {
    super(typeof body.detail === "string" ? body.detail : (body.error ?? `HTTP ${status}`));
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base: string = "",
  ) {}

  private async request<T>(url: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + url, init);
    if (!response.ok) {
      let body: ErrorBody = {};
      try {
        body = (await response.json()) as ErrorBody;
      } catch {
        // non-JSON error body; status alone will have to do
      }
      throw new ApiError(response.status, body);
    }
    return (await response.json()) as T;
  }

  getMetadata(): Promise<Metadata> {
    return this.request<Metadata>("/api/metadata");
  }

  getFrontier(attribute: string, threshold: number): Promise<Frontier> {
    const params = new URLSearchParams({ attribute, threshold: String(threshold) });
    return this.request<Frontier>(`/api/frontier?${params}`);
  }

  getEvaluation(model: string, threshold: number, attribute?: string | null): Promise<Evaluation> {
    const params = new URLSearchParams({ model, threshold: String(threshold) });
    if (attribute) params.set("attribute", attribute);
    return this.request<Evaluation>(`/api/evaluation?${params}`);
  }

  postSelection(body: SelectionRequest): Promise<SelectionAck> {
    return this.request<SelectionAck>("/api/selection", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
