/** JSON document shapes served by the allocation service (see SCHEMAS.md). */

export interface ValidationIssue {
  severity: "error" | "warning";
  code: string;
  message: string;
}

export interface PanelSuggestions {
  default_tables: number;
  min_cluster_tables: number;
  recommended_cluster_tables: number;
}

export interface PanelUploadResponse {
  panel_id: string;
  participants: number;
  demographics: string[];
  cluster_agents: number;
  issues: ValidationIssue[];
  suggestions: PanelSuggestions;
}

export interface RunConfigBody {
  num_tables: number;
  num_rounds: number;
  num_cluster_tables: number;
  swap_rounds: number;
  pareto_mix: number;
  saturation_base: number;
  rng_seed: number;
  /** "counts" (default) or "geometric"; the UI leaves it server-default. */
  meeting_weighting?: string;
}

export interface BoundsDoc {
  pairs_total: number;
  meetings_per_round: number;
  min_repeats: number;
  min_unmet_pairs: number;
  max_first_meetings: number;
}

/** Per round, demographic name -> per-table balance distance. */
export type RoundBalance = Record<string, number[]>;

export interface ReportDoc {
  schema_version: string;
  config: RunConfigBody;
  panel?: { participants: number; demographics: string[]; cluster_agents: number };
  mean_distance: number;
  geometric_score: number;
  per_round_balance: RoundBalance[];
  meeting_curves: number[][];
  bounds: BoundsDoc;
  unmet_pairs: number;
  excess: number | null;
  excess_reason: string | null;
  first_meeting_fraction: number | null;
}

export type RunStatus = "pending" | "done" | "failed";

export interface RunRecord {
  run_id: string;
  panel_id: string;
  status: RunStatus;
  config: RunConfigBody;
  report: ReportDoc | null;
  error?: { message: string };
}

export interface ClusterSuggestion {
  minimum: number;
  recommended: number;
}

/** The `detail` payload of a 4xx response from the service. */
export interface ApiRejection {
  message: string;
  suggestion?: ClusterSuggestion;
  issues?: ValidationIssue[];
}

export interface ColumnRoles {
  idColumn?: string;
  demographicColumns?: string;
  clusterColumn?: string;
  clusterValue?: string;
  manualColumn?: string;
  delimiter?: string;
}
