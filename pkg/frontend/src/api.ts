/** Typed fetch client for the allocation service. */

import type {
  ApiRejection,
  ColumnRoles,
  PanelUploadResponse,
  RunConfigBody,
  RunRecord,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly rejection: ApiRejection,
  ) {
    super(rejection.message);
  }
}

async function rejectionFrom(response: Response): Promise<ApiRejection> {
  try {
    const body = await response.json();
    const detail = body?.detail;
    if (detail && typeof detail === "object" && "message" in detail) {
      return detail as ApiRejection;
    }
    if (typeof detail === "string") {
      return { message: detail };
    }
    return { message: JSON.stringify(body) };
  } catch {
    return { message: `${response.status} ${response.statusText}` };
  }
}

export class GroupOptClient {
  constructor(private readonly baseUrl: string = "") {}

  async uploadPanel(file: File, roles: ColumnRoles = {}): Promise<PanelUploadResponse> {
    const form = new FormData();
    form.append("file", file);
    if (roles.idColumn) form.append("id_column", roles.idColumn);
    if (roles.demographicColumns) form.append("demographic_columns", roles.demographicColumns);
    if (roles.clusterColumn) form.append("cluster_column", roles.clusterColumn);
    if (roles.clusterValue !== undefined && roles.clusterColumn) {
      form.append("cluster_value", roles.clusterValue);
    }
    if (roles.manualColumn) form.append("manual_column", roles.manualColumn);
    if (roles.delimiter) form.append("delimiter", roles.delimiter);
    const response = await fetch(`${this.baseUrl}/api/panels`, {
      method: "POST",
      body: form,
    });
    if (!response.ok) {
      throw new ApiError(response.status, await rejectionFrom(response));
    }
    return (await response.json()) as PanelUploadResponse;
  }

  async createRun(panelId: string, config: RunConfigBody): Promise<{ run_id: string; status: string }> {
    const response = await fetch(`${this.baseUrl}/api/runs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ panel_id: panelId, config }),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await rejectionFrom(response));
    }
    return (await response.json()) as { run_id: string; status: string };
  }

  async getRun(runId: string): Promise<RunRecord> {
    const response = await fetch(`${this.baseUrl}/api/runs/${encodeURIComponent(runId)}`);
    if (!response.ok) {
      throw new ApiError(response.status, await rejectionFrom(response));
    }
    return (await response.json()) as RunRecord;
  }

  allocationsUrl(runId: string): string {
    return `${this.baseUrl}/api/runs/${encodeURIComponent(runId)}/allocations`;
  }
}
