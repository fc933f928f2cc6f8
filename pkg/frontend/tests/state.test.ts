import { describe, expect, it } from "vitest";

import {
  DEFAULT_DRAFT,
  appendRun,
  applyClusterSuggestion,
  clamp01,
  draftFromInputs,
  draftFromSuggestions,
  emptySession,
} from "../src/state.js";
import type { ApiRejection, PanelUploadResponse, RunRecord } from "../src/types.js";
import rejection422 from "./fixtures/run_422.json" with { type: "json" };
import panelUpload from "./fixtures/panel_upload.json" with { type: "json" };
import runRecord from "./fixtures/run_record.json" with { type: "json" };

const upload = panelUpload as unknown as PanelUploadResponse;
const record = runRecord as unknown as RunRecord;
const rejection = (rejection422 as { detail: ApiRejection }).detail;

describe("applyClusterSuggestion", () => {
  it("sets the cluster-table count to the 422 payload's recommendation", () => {
    const draft = { ...DEFAULT_DRAFT, num_cluster_tables: 1 };
    expect(rejection.suggestion).toBeDefined();
    const updated = applyClusterSuggestion(draft, rejection.suggestion!);
    expect(updated.num_cluster_tables).toBe(rejection.suggestion!.recommended);
    expect(updated.num_tables).toBe(draft.num_tables);
  });

  it("does not mutate the previous draft", () => {
    const draft = { ...DEFAULT_DRAFT, num_cluster_tables: 1 };
    applyClusterSuggestion(draft, { minimum: 2, recommended: 3 });
    expect(draft.num_cluster_tables).toBe(1);
  });
});

describe("draftFromSuggestions", () => {
  it("adopts the server's default table counts", () => {
    const draft = draftFromSuggestions(upload.suggestions);
    expect(draft.num_tables).toBe(upload.suggestions.default_tables);
    expect(draft.num_cluster_tables).toBe(upload.suggestions.recommended_cluster_tables);
    expect(draft.pareto_mix).toBe(0.5);
  });
});

describe("appendRun", () => {
  it("records headline metrics from a finished run", () => {
    const history = appendRun([], record);
    expect(history.length).toBe(1);
    const entry = history[0]!;
    expect(entry.runId).toBe(record.run_id);
    expect(entry.geometricScore).toBe(record.report!.geometric_score);
    expect(entry.meanDistance).toBe(record.report!.mean_distance);
    expect(entry.unmetPairs).toBe(record.report!.unmet_pairs);
    expect(entry.excess).toBe(record.report!.excess);
  });

  it("ignores unfinished runs", () => {
    const pending = { ...record, status: "pending" as const, report: null };
    expect(appendRun([], pending)).toEqual([]);
  });
});

describe("draftFromInputs", () => {
  it("parses form values and keeps the mix inside [0, 1]", () => {
    const base = { ...DEFAULT_DRAFT };
    const draft = draftFromInputs(
      { num_tables: "4", pareto_mix: "1.7", rng_seed: "12" },
      base,
    );
    expect(draft.num_tables).toBe(4);
    expect(draft.pareto_mix).toBe(1); // slider bound
    expect(draft.rng_seed).toBe(12);
    expect(draft.num_rounds).toBe(base.num_rounds);
  });

  it("falls back to the previous draft on junk input", () => {
    const draft = draftFromInputs({ num_tables: "lots" }, DEFAULT_DRAFT);
    expect(draft.num_tables).toBe(DEFAULT_DRAFT.num_tables);
  });
});

describe("clamp01", () => {
  it("bounds the mixing probability", () => {
    expect(clamp01(-0.2)).toBe(0);
    expect(clamp01(0.4)).toBe(0.4);
    expect(clamp01(1.2)).toBe(1);
  });
});

describe("emptySession", () => {
  it("starts with no panel and the default draft", () => {
    const session = emptySession();
    expect(session.upload).toBeNull();
    expect(session.draft).toEqual(DEFAULT_DRAFT);
    expect(session.history).toEqual([]);
  });
});
