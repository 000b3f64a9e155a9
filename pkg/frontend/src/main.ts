/** Wires the service client, session state, and view builders to the page. */

import { ApiClient, ProjectionResponse, ServiceError } from "./api.js";
import {
  renderBanner,
  renderError,
  renderExplanationBars,
  renderForm,
  renderHistory,
  renderImportance,
  renderNeighborScatter,
  renderScoreBars,
} from "./render.js";
import { SessionState } from "./state.js";

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
};

async function boot(): Promise<void> {
  const api = new ApiClient((input, init) => fetch(input, init));
  let projection: ProjectionResponse;
  let state: SessionState;
  try {
    const health = await api.health();
    projection = await api.projection();
    state = new SessionState(api, health.model.feature_names);
    const importance = await api.importance();
    $("importance-panel").innerHTML = renderImportance(importance.entries);
    $("model-info").textContent =
      `${health.model.training_size} training windows - ` +
      `k=${health.model.hyperparameters.n_neighbors} ` +
      `${health.model.hyperparameters.metric} ` +
      `${health.model.hyperparameters.weighting}`;
  } catch (err) {
    $("error-panel").innerHTML = renderError(
      err instanceof ServiceError ? err.message : String(err),
    );
    $("error-panel").querySelector("#retry-btn")?.addEventListener("click", boot);
    return;
  }

  $("error-panel").innerHTML = "";
  $("form-panel").innerHTML = renderForm(state.featureNames);
  const form = $("form-panel").querySelector("form") as HTMLFormElement;

  const refresh = () => {
    const response = state.latest;
    if (!response) return;
    $("banner-panel").innerHTML = renderBanner(response);
    $("scores-panel").innerHTML = renderScoreBars(response);
    $("scatter-panel").innerHTML = renderNeighborScatter(projection, response);
    $("explanation-panel").innerHTML = renderExplanationBars(response);
    $("history-panel").innerHTML = renderHistory(state.history);
  };

  const readForm = (): Record<string, string> => {
    const values: Record<string, string> = {};
    form.querySelectorAll("input").forEach((input) => {
      values[input.name] = input.value;
    });
    return values;
  };

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const { features, errors } = state.validate(readForm());
    if (!features) {
      $("form-panel").innerHTML = renderForm(state.featureNames, {}, errors);
      return;
    }
    try {
      const response = await state.submit(features);
      if (response) refresh(); // null means a newer submission superseded it
      $("error-panel").innerHTML = "";
    } catch (err) {
      $("error-panel").innerHTML = renderError(
        err instanceof ServiceError ? err.message : String(err),
      );
    }
  });
}

boot();
