/** Pure view-model derivations from session snapshots.
 *
 * Every number shown in the UI comes from a snapshot; nothing here
 * recomputes probabilities, it only selects, sorts and formats them.
 */
import type { SessionSnapshot } from "./types.js";

export const TOP_LABELS = 10;

export interface AnswerButton {
  label: string;
  value: number;
}

export interface PosteriorBar {
  label: string;
  probability: number;
}

export interface HistoryRow {
  query: string;
  answerText: string;
  /** Fig. 3b convention: green for an affirmative answer, red otherwise. */
  tone: "green" | "red";
}

export interface HeatmapCell {
  label: string;
  probability: number;
  /** Probability clamped to [0,1] for the color scale. */
  intensity: number;
}

export interface SessionViewModel {
  sessionId: string;
  status: "AwaitingAnswer" | "Stopped";
  proposedQueryName: string | null;
  answerButtons: AnswerButton[];
  posteriorBars: PosteriorBar[];
  history: HistoryRow[];
  /** One row per posterior (steps + 1), columns are the final top labels. */
  heatmap: HeatmapCell[][];
  heatmapColumns: string[];
  banner: { prediction: string; stopReason: string } | null;
}

/** Parse the stopping threshold input; null means "reject, keep disabled". */
export function parseEpsilon(raw: string): number | null {
  const value = Number(raw);
  if (!Number.isFinite(value) || value <= 0 || value >= 1) return null;
  return value;
}

export function answerButtonsFor(domain: string): AnswerButton[] {
  switch (domain) {
    case "Binary01":
      return [{ label: "Yes", value: 1 }, { label: "No", value: 0 }];
    case "BinaryPM1":
      return [{ label: "Yes", value: 1 }, { label: "No", value: -1 }];
    case "TernaryPM10":
      return [
        { label: "Yes", value: 1 },
        { label: "No", value: -1 },
        { label: "Can't say", value: 0.5 },
      ];
    default:
      throw new Error(`unknown answer domain ${domain}`);
  }
}

/** Indices of the k most probable labels, most probable first. */
export function topLabelIndices(posterior: number[], k: number): number[] {
  return posterior
    .map((p, i) => i)
    .sort((a, b) => posterior[b] - posterior[a] || a - b)
    .slice(0, k);
}

export function posteriorBars(
  labels: string[],
  posterior: number[],
  k: number = TOP_LABELS,
): PosteriorBar[] {
  return topLabelIndices(posterior, k).map((i) => ({
    label: labels[i],
    probability: posterior[i],
  }));
}

export function historyRows(snapshot: SessionSnapshot): HistoryRow[] {
  return snapshot.steps.map((step) => ({
    query: step.query,
    answerText: step.answer >= 1 ? "Yes" : step.answer === 0.5 ? "Can't say" : "No",
    tone: step.answer >= 1 ? "green" : "red",
  }));
}

/** Step-by-step posterior heatmap over the final step's top labels. */
export function posteriorHeatmap(snapshot: SessionSnapshot): {
  columns: string[];
  rows: HeatmapCell[][];
} {
  const final = snapshot.posterior_history[snapshot.posterior_history.length - 1];
  const order = topLabelIndices(final, TOP_LABELS);
  const columns = order.map((i) => snapshot.labels[i]);
  const rows = snapshot.posterior_history.map((posterior) =>
    order.map((i) => ({
      label: snapshot.labels[i],
      probability: posterior[i],
      intensity: Math.min(Math.max(posterior[i], 0), 1),
    })),
  );
  return { columns, rows };
}

export function buildViewModel(snapshot: SessionSnapshot): SessionViewModel {
  const heat = posteriorHeatmap(snapshot);
  return {
    sessionId: snapshot.session_id,
    status: snapshot.status,
    proposedQueryName: snapshot.proposed_query?.name ?? null,
    answerButtons: snapshot.proposed_query
      ? answerButtonsFor(snapshot.proposed_query.domain)
      : [],
    posteriorBars: posteriorBars(snapshot.labels, snapshot.posterior),
    history: historyRows(snapshot),
    heatmap: heat.rows,
    heatmapColumns: heat.columns,
    banner:
      snapshot.status === "Stopped"
        ? {
            prediction: snapshot.prediction ?? "",
            stopReason: snapshot.stop_reason ?? "",
          }
        : null,
  };
}
