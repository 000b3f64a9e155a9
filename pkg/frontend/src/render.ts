/** Pure view builders: every function maps service data to an HTML/SVG
 * string, so they are testable without a DOM. */

import {
  ImportanceEntry,
  PredictResponse,
  ProjectionResponse,
} from "./api.js";
import { HistoryEntry } from "./state.js";

export const CLASS_COLORS: Record<string, string> = {
  "Good Condition": "#2e7d32",
  "Initial Wear": "#f9a825",
  "Progressed Wear": "#c62828",
};

const POSITIVE = "#2e7d32";
const NEGATIVE = "#c62828";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Numeric input per served feature name — never a hard-coded field list. */
export function renderForm(
  featureNames: string[],
  values: Record<string, number> = {},
  errors: Record<string, string> = {},
): string {
  const rows = featureNames.map((name) => {
    const value = name in values ? String(values[name]) : "";
    const error = errors[name]
      ? `<span class="field-error">${esc(errors[name])}</span>`
      : "";
    return (
      `<label class="field" data-feature="${esc(name)}">` +
      `<span class="field-name">${esc(name)}</span>` +
      `<input type="text" inputmode="decimal" name="${esc(name)}" value="${esc(value)}">` +
      error +
      `</label>`
    );
  });
  return `<form id="feature-form">${rows.join("")}` +
    `<button type="submit" id="predict-btn">Predict</button></form>`;
}

export function renderBanner(response: PredictResponse): string {
  const color = CLASS_COLORS[response.condition] ?? "#555";
  return (
    `<div class="banner" style="background:${color}" ` +
    `data-condition="${esc(response.condition)}">${esc(response.condition)}</div>`
  );
}

export function renderScoreBars(response: PredictResponse): string {
  const names = response.model.class_names;
  const total = response.scores.reduce((a, b) => a + b, 0) || 1;
  const bars = names.map((name, i) => {
    const share = response.scores[i] / total;
    const color = CLASS_COLORS[name] ?? "#555";
    return (
      `<div class="score-row" data-class="${esc(name)}" data-share="${share}">` +
      `<span class="score-label">${esc(name)}</span>` +
      `<div class="score-bar" style="width:${(share * 100).toFixed(1)}%;background:${color}"></div>` +
      `<span class="score-value">${(share * 100).toFixed(1)}%</span></div>`
    );
  });
  return `<div class="scores">${bars.join("")}</div>`;
}

/** Training cloud with the query point and its neighbor segments overlaid.
 * Uses the service-supplied projection so UI and pipeline plots agree. */
export function renderNeighborScatter(
  projection: ProjectionResponse,
  response: PredictResponse,
  width = 420,
  height = 320,
): string {
  const margin = 24;
  const xs = projection.points.map((p) => p.x);
  const ys = projection.points.map((p) => p.y);
  if (response.query_point) {
    xs.push(response.query_point.x);
    ys.push(response.query_point.y);
  }
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const sx = (v: number) =>
    margin + ((v - xMin) / (xMax - xMin || 1)) * (width - 2 * margin);
  const sy = (v: number) =>
    height - margin - ((v - yMin) / (yMax - yMin || 1)) * (height - 2 * margin);

  const classNames = response.model.class_names;
  const body: string[] = [];
  for (const p of projection.points) {
    const color = CLASS_COLORS[classNames[p.label]] ?? "#555";
    body.push(
      `<circle class="pt" cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}" ` +
        `r="3" fill="${color}" data-label="${p.label}"/>`,
    );
  }
  if (response.query_point && response.neighbors) {
    const q = response.query_point;
    for (const nb of response.neighbors) {
      body.push(
        `<line class="segment" x1="${sx(q.x).toFixed(1)}" y1="${sy(q.y).toFixed(1)}" ` +
          `x2="${sx(nb.x).toFixed(1)}" y2="${sy(nb.y).toFixed(1)}" ` +
          `stroke="#666" stroke-dasharray="3 2" data-neighbor="${nb.index}"/>`,
      );
      body.push(
        `<circle class="neighbor" cx="${sx(nb.x).toFixed(1)}" cy="${sy(nb.y).toFixed(1)}" ` +
          `r="6" fill="none" stroke="#000" data-neighbor="${nb.index}"/>`,
      );
    }
    body.push(
      `<circle class="query" cx="${sx(q.x).toFixed(1)}" cy="${sy(q.y).toFixed(1)}" ` +
        `r="5" fill="#000"/>`,
    );
  }
  return (
    `<svg class="scatter" viewBox="0 0 ${width} ${height}" ` +
    `xmlns="http://www.w3.org/2000/svg">${body.join("")}</svg>`
  );
}

/** Signed local-influence bars: positive green to the right, negative red to
 * the left of a center axis. */
export function renderExplanationBars(
  response: PredictResponse,
  width = 420,
  rowHeight = 22,
): string {
  const explanation = response.explanation;
  if (!explanation) {
    return `<div class="explanation-empty">no explanation requested</div>`;
  }
  const coefs = explanation.coefficients[explanation.predicted_label] ?? {};
  const entries = Object.entries(coefs);
  const maxAbs = Math.max(...entries.map(([, v]) => Math.abs(v)), 1e-12);
  const center = width / 2;
  const half = width / 2 - 90;
  const height = entries.length * rowHeight + 10;
  const body: string[] = [
    `<line x1="${center}" y1="5" x2="${center}" y2="${height - 5}" stroke="#999"/>`,
  ];
  entries.forEach(([name, value], i) => {
    const w = (Math.abs(value) / maxAbs) * half;
    const x = value >= 0 ? center : center - w;
    const color = value >= 0 ? POSITIVE : NEGATIVE;
    const y = 8 + i * rowHeight;
    body.push(
      `<rect class="coef-bar" x="${x.toFixed(1)}" y="${y}" width="${w.toFixed(1)}" ` +
        `height="${rowHeight - 8}" fill="${color}" data-feature="${esc(name)}" ` +
        `data-value="${value}"/>`,
    );
    body.push(
      `<text x="4" y="${y + rowHeight - 12}" font-size="11">${esc(name)}</text>`,
    );
  });
  return (
    `<svg class="explanation" viewBox="0 0 ${width} ${height}" ` +
    `xmlns="http://www.w3.org/2000/svg">${body.join("")}</svg>`
  );
}

export function renderImportance(entries: ImportanceEntry[]): string {
  const maxMean = Math.max(...entries.map((e) => e.mean), 1e-12);
  const rows = entries.map(
    (e) =>
      `<div class="imp-row" data-feature="${esc(e.feature)}">` +
      `<span class="imp-name">${esc(e.feature)}</span>` +
      `<div class="imp-bar" style="width:${((e.mean / maxMean) * 100).toFixed(1)}%"></div>` +
      `<span class="imp-value">${e.mean.toFixed(4)} &plusmn; ${e.std.toFixed(4)}</span></div>`,
  );
  return `<div class="importance">${rows.join("")}</div>`;
}

export function renderHistory(entries: readonly HistoryEntry[]): string {
  const rows = entries.map((e, i) => {
    const flip = e.flipped ? `<span class="flip-flag">condition changed</span>` : "";
    const changed =
      e.changedFeatures.length > 0 ? ` (${e.changedFeatures.map(esc).join(", ")})` : "";
    return (
      `<li class="history-entry" data-condition="${esc(e.condition)}" ` +
      `data-flipped="${e.flipped}">#${i + 1} ${esc(e.condition)}${changed} ${flip}</li>`
    );
  });
  return `<ol class="history">${rows.join("")}</ol>`;
}

export function renderError(message: string): string {
  return (
    `<div class="error" role="alert">${esc(message)} ` +
    `<button type="button" id="retry-btn">Retry</button></div>`
  );
}
