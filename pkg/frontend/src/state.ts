/** Session state: the current base request, what-if deltas, and an
 * append-only history in which every entry mirrors a real service response.
 * The UI never computes a prediction locally. */

import { ApiClient, PredictRequest, PredictResponse } from "./api.js";

export interface HistoryEntry {
  features: Record<string, number>;
  condition: string;
  scores: [number, number, number];
  flipped: boolean;
  changedFeatures: string[];
}

export interface RequestLogEntry {
  request: PredictRequest;
  response: PredictResponse;
}

export class SessionState {
  /** Every /predict exchange, in order; history entries point into this. */
  readonly requestLog: RequestLogEntry[] = [];
  private historyEntries: HistoryEntry[] = [];
  private base: Record<string, number> | null = null;
  private lastResponse: PredictResponse | null = null;
  private inFlight = 0;

  constructor(
    private readonly api: ApiClient,
    readonly featureNames: string[],
  ) {}

  get history(): readonly HistoryEntry[] {
    return this.historyEntries;
  }

  get baseFeatures(): Record<string, number> | null {
    return this.base ? { ...this.base } : null;
  }

  get latest(): PredictResponse | null {
    return this.lastResponse;
  }

  /** Validate a raw form value map against the served feature names. */
  validate(values: Record<string, string>): {
    features: Record<string, number> | null;
    errors: Record<string, string>;
  } {
    const features: Record<string, number> = {};
    const errors: Record<string, string> = {};
    for (const name of this.featureNames) {
      const raw = (values[name] ?? "").trim();
      const value = Number(raw);
      if (raw === "" || !Number.isFinite(value)) {
        errors[name] = "enter a finite number";
      } else {
        features[name] = value;
      }
    }
    return Object.keys(errors).length > 0
      ? { features: null, errors }
      : { features, errors };
  }

  /** Submit a full feature vector as the new base prediction.
   * Last-write-wins: a response is discarded if a newer submission started
   * while it was in flight. Returns null for superseded responses. */
  async submit(features: Record<string, number>): Promise<PredictResponse | null> {
    const response = await this.exchange(features);
    if (response === null) {
      return null;
    }
    this.base = { ...features };
    this.appendHistory(features, response, []);
    return response;
  }

  /** Apply per-feature deltas on top of the base request. */
  async whatIf(delta: Record<string, number>): Promise<PredictResponse | null> {
    if (this.base === null) {
      throw new Error("no base prediction yet");
    }
    const features = { ...this.base };
    const changed: string[] = [];
    for (const [name, d] of Object.entries(delta)) {
      if (!(name in features)) {
        throw new Error(`unknown feature ${name}`);
      }
      if (d !== 0) {
        features[name] += d;
        changed.push(name);
      }
    }
    const response = await this.exchange(features);
    if (response === null) {
      return null;
    }
    this.appendHistory(features, response, changed);
    return response;
  }

  private async exchange(
    features: Record<string, number>,
  ): Promise<PredictResponse | null> {
    const ticket = ++this.inFlight;
    const request: PredictRequest = {
      features,
      include_neighbors: true,
      include_explanation: true,
    };
    const response = await this.api.predict(request);
    if (ticket !== this.inFlight) {
      return null; // a newer submission superseded this one
    }
    this.requestLog.push({ request, response });
    this.lastResponse = response;
    return response;
  }

  private appendHistory(
    features: Record<string, number>,
    response: PredictResponse,
    changedFeatures: string[],
  ): void {
    const previous = this.historyEntries[this.historyEntries.length - 1];
    this.historyEntries.push({
      features: { ...features },
      condition: response.condition,
      scores: response.scores,
      flipped: previous !== undefined && previous.condition !== response.condition,
      changedFeatures,
    });
  }
}
