import { describe, expect, it } from "vitest";

import { emptySession } from "../src/state.js";
import type {
  ApiRejection,
  PanelUploadResponse,
  RunRecord,
  ValidationIssue,
} from "../src/types.js";
import {
  configureViewHtml,
  issuesHtml,
  notFoundHtml,
  rejectionHtml,
  reportViewHtml,
  uploadViewHtml,
} from "../src/views.js";
import rejection422 from "./fixtures/run_422.json" with { type: "json" };
import panelUpload from "./fixtures/panel_upload.json" with { type: "json" };
import runRecord from "./fixtures/run_record.json" with { type: "json" };

const upload = panelUpload as unknown as PanelUploadResponse;
const record = runRecord as unknown as RunRecord;
const rejection = (rejection422 as { detail: ApiRejection }).detail;

describe("issuesHtml", () => {
  it("renders a merge hint for many-valued demographics", () => {
    const issues: ValidationIssue[] = [
      {
        severity: "warning",
        code: "too-many-values",
        message: "demographic 'city' has 7 values",
      },
    ];
    const html = issuesHtml(issues);
    expect(html).toContain("warning");
    expect(html).toContain("city");
    expect(html).toContain("Merge granular levels");
  });

  it("shows a green state for a clean panel", () => {
    expect(issuesHtml([])).toContain("looks good");
  });
});

describe("rejectionHtml", () => {
  it("prints the server message verbatim and offers the one-click fix", () => {
    const html = rejectionHtml(rejection);
    expect(html).toContain(rejection.message);
    expect(html).toContain('id="apply-suggestion"');
    expect(html).toContain(`data-recommended="${rejection.suggestion!.recommended}"`);
  });
});

describe("configureViewHtml", () => {
  it("bounds the mixing slider to [0, 1]", () => {
    const state = emptySession();
    state.upload = upload;
    const html = configureViewHtml(state);
    expect(html).toContain('name="pareto_mix" min="0" max="1"');
  });

  it("shows the server's suggested parameters", () => {
    const state = emptySession();
    state.upload = upload;
    const html = configureViewHtml(state);
    expect(html).toContain(`${upload.suggestions.default_tables} tables`);
    expect(html).toContain(`recommended ${upload.suggestions.recommended_cluster_tables}`);
  });
});

describe("uploadViewHtml", () => {
  it("summarises the uploaded panel", () => {
    const state = emptySession();
    state.upload = upload;
    const html = uploadViewHtml(state);
    expect(html).toContain(`${upload.participants} participants`);
    expect(html).toContain(`${upload.cluster_agents} to cluster`);
  });
});

describe("reportViewHtml", () => {
  it("renders headline metrics, chart, heatmap, and the download link", () => {
    const html = reportViewHtml(record, "/api/runs/fixture-run/allocations");
    expect(html).toContain('id="headline-excess">n/a (clustering)');
    expect(html).toContain("curve-chart");
    expect(html).toContain('class="heatmap"');
    expect(html).toContain('download="allocations.csv"');
    expect(html).toMatchSnapshot();
  });

  it("handles pending and failed runs", () => {
    const pending = { ...record, status: "pending" as const, report: null };
    expect(reportViewHtml(pending, "")).toContain("Still running");
    const failed = {
      ...record,
      status: "failed" as const,
      report: null,
      error: { message: "boom" },
    };
    expect(reportViewHtml(failed, "")).toContain("boom");
  });
});

describe("notFoundHtml", () => {
  it("offers a way back", () => {
    const html = notFoundHtml("missing-run");
    expect(html).toContain("missing-run");
    expect(html).toContain('href="#/"');
  });
});
