/** Typed client for the inference service. All UI data comes through here. */

export interface Hyperparameters {
  n_neighbors: number;
  metric: string;
  weighting: string;
}

export interface ModelMetadata {
  feature_names: string[];
  training_size: number;
  hyperparameters: Hyperparameters;
  class_names: string[];
}

export interface HealthResponse {
  status: string;
  model: ModelMetadata;
}

export interface ImportanceEntry {
  feature: string;
  mean: number;
  std: number;
}

export interface ProjectionPoint {
  x: number;
  y: number;
  label: number;
}

export interface ProjectionResponse {
  explained_variance: [number, number];
  points: ProjectionPoint[];
}

export interface NeighborInfo {
  index: number;
  distance: number;
  weight: number;
  label: string;
  x: number;
  y: number;
}

export interface Explanation {
  predicted_label: string;
  coefficients: Record<string, Record<string, number>>;
  r_squared: number;
  kernel_width: number;
}

export interface PredictRequest {
  features: Record<string, number>;
  include_neighbors?: boolean;
  include_explanation?: boolean;
  explanation_seed?: number;
}

export interface PredictResponse {
  condition: string;
  condition_index: number;
  scores: [number, number, number];
  model: ModelMetadata;
  neighbors?: NeighborInfo[];
  query_point?: { x: number; y: number };
  explanation?: Explanation;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
  }
}

async function getJson<T>(fetchFn: FetchLike, path: string): Promise<T> {
  let response: Response;
  try {
    response = await fetchFn(path);
  } catch (err) {
    throw new ServiceError(`service unreachable: ${String(err)}`);
  }
  if (!response.ok) {
    throw new ServiceError(`${path} failed (${response.status})`, response.status);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly fetchFn: FetchLike) {}

  health(): Promise<HealthResponse> {
    return getJson(this.fetchFn, "/health");
  }

  importance(): Promise<{ entries: ImportanceEntry[] }> {
    return getJson(this.fetchFn, "/model/importance");
  }

  projection(): Promise<ProjectionResponse> {
    return getJson(this.fetchFn, "/model/projection");
  }

  async predict(request: PredictRequest): Promise<PredictResponse> {
    let response: Response;
    try {
      response = await this.fetchFn("/predict", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(request),
      });
    } catch (err) {
      throw new ServiceError(`service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      const body = await response.json().catch(() => null);
      const detail = body?.detail;
      const message = Array.isArray(detail)
        ? detail.map((d: { field: string; message: string }) => `${d.field}: ${d.message}`).join("; ")
        : `predict failed (${response.status})`;
      throw new ServiceError(message, response.status);
    }
    return (await response.json()) as PredictResponse;
  }
}
