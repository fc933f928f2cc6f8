/** Session state and the pure transitions the views apply to it. */

import type {
  ApiRejection,
  ClusterSuggestion,
  PanelSuggestions,
  PanelUploadResponse,
  RunConfigBody,
  RunRecord,
} from "./types.js";

export interface RunSummary {
  runId: string;
  tables: number;
  clusterTables: number;
  rounds: number;
  seed: number;
  meanDistance: number;
  geometricScore: number;
  unmetPairs: number;
  excess: number | null;
}

export interface SessionState {
  upload: PanelUploadResponse | null;
  draft: RunConfigBody;
  lastRejection: ApiRejection | null;
  history: RunSummary[];
}

export const DEFAULT_DRAFT: RunConfigBody = {
  num_tables: 3,
  num_rounds: 5,
  num_cluster_tables: 0,
  swap_rounds: 5,
  pareto_mix: 0.5,
  saturation_base: 0.5,
  rng_seed: 0,
};

export function emptySession(): SessionState {
  return {
    upload: null,
    draft: { ...DEFAULT_DRAFT },
    lastRejection: null,
    history: [],
  };
}

/** Seed a config draft from the server's upload-time suggestions. */
export function draftFromSuggestions(
  suggestions: PanelSuggestions,
  base: RunConfigBody = DEFAULT_DRAFT,
): RunConfigBody {
  return {
    ...base,
    num_tables: suggestions.default_tables,
    num_cluster_tables: suggestions.recommended_cluster_tables,
  };
}

/** One-click fix: adopt the recommended cluster-table count from a 422. */
export function applyClusterSuggestion(
  draft: RunConfigBody,
  suggestion: ClusterSuggestion,
): RunConfigBody {
  return { ...draft, num_cluster_tables: suggestion.recommended };
}

export function clamp01(x: number): number {
  return Math.min(1, Math.max(0, x));
}

/** Append the headline metrics of a finished run to the history. */
export function appendRun(history: RunSummary[], record: RunRecord): RunSummary[] {
  if (record.status !== "done" || record.report === null) {
    return history;
  }
  const report = record.report;
  return [
    ...history,
    {
      runId: record.run_id,
      tables: record.config.num_tables,
      clusterTables: record.config.num_cluster_tables,
      rounds: record.config.num_rounds,
      seed: record.config.rng_seed,
      meanDistance: report.mean_distance,
      geometricScore: report.geometric_score,
      unmetPairs: report.unmet_pairs,
      excess: report.excess,
    },
  ];
}

/** Read the numeric form fields of the configure view back into a draft. */
export function draftFromInputs(values: Record<string, string>, base: RunConfigBody): RunConfigBody {
  const num = (key: string, fallback: number, float = false): number => {
    const raw = values[key];
    if (raw === undefined || raw === "") return fallback;
    const parsed = float ? parseFloat(raw) : parseInt(raw, 10);
    return Number.isFinite(parsed) ? parsed : fallback;
  };
  return {
    num_tables: num("num_tables", base.num_tables),
    num_rounds: num("num_rounds", base.num_rounds),
    num_cluster_tables: num("num_cluster_tables", base.num_cluster_tables),
    swap_rounds: num("swap_rounds", base.swap_rounds),
    pareto_mix: clamp01(num("pareto_mix", base.pareto_mix, true)),
    saturation_base: num("saturation_base", base.saturation_base, true),
    rng_seed: num("rng_seed", base.rng_seed),
  };
}
