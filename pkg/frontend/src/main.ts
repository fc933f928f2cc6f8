/** Wiring: hash router, event handlers, server calls. */

import { ApiError, GroupOptClient } from "./api.js";
import {
  appendRun,
  applyClusterSuggestion,
  draftFromInputs,
  draftFromSuggestions,
  emptySession,
  type SessionState,
} from "./state.js";
import type { ColumnRoles } from "./types.js";
import {
  configureViewHtml,
  historyHtml,
  notFoundHtml,
  reportViewHtml,
  uploadViewHtml,
} from "./views.js";

const client = new GroupOptClient("");
const state: SessionState = emptySession();

function root(): HTMLElement {
  const el = document.getElementById("app");
  if (!el) throw new Error("missing #app container");
  return el;
}

function renderMain(): void {
  root().innerHTML =
    uploadViewHtml(state) + configureViewHtml(state) + historyHtml(state);
  bindUploadForm();
  bindRunForm();
}

async function renderReport(runId: string): Promise<void> {
  try {
    const record = await client.getRun(runId);
    root().innerHTML = reportViewHtml(record, client.allocationsUrl(runId));
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      root().innerHTML = notFoundHtml(runId);
    } else {
      root().innerHTML = `<section><p class="error">Could not load the run: ${String(err)}</p></section>`;
    }
  }
}

function formRoles(form: HTMLFormElement): ColumnRoles {
  const value = (name: string): string | undefined => {
    const field = form.elements.namedItem(name) as HTMLInputElement | null;
    const raw = field?.value.trim();
    return raw ? raw : undefined;
  };
  return {
    idColumn: value("idColumn"),
    demographicColumns: value("demographicColumns"),
    clusterColumn: value("clusterColumn"),
    clusterValue: value("clusterValue"),
    manualColumn: value("manualColumn"),
  };
}

function bindUploadForm(): void {
  const form = document.getElementById("upload-form") as HTMLFormElement | null;
  if (!form) return;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const input = document.getElementById("panel-file") as HTMLInputElement;
    const file = input.files?.[0];
    const result = document.getElementById("upload-result")!;
    if (!file) {
      result.innerHTML = '<p class="error">Choose a panel file first.</p>';
      return;
    }
    try {
      const upload = await client.uploadPanel(file, formRoles(form));
      state.upload = upload;
      state.draft = draftFromSuggestions(upload.suggestions, state.draft);
      state.lastRejection = null;
      renderMain();
    } catch (err) {
      if (err instanceof ApiError) {
        const issues = err.rejection.issues ?? [];
        result.innerHTML =
          `<p class="error">Upload rejected: ${err.rejection.message}</p>` +
          (issues.length
            ? `<ul class="issues">${issues
                .map((i) => `<li class="error">${i.message}</li>`)
                .join("")}</ul>`
            : "") +
          '<p class="hint">Fix the file (or adjust the column roles) and upload again.</p>';
      } else {
        result.innerHTML = `<p class="error">Upload failed: ${String(err)}</p>`;
      }
    }
  });
}

function bindRunForm(): void {
  const form = document.getElementById("run-form") as HTMLFormElement | null;
  if (!form) return;
  const mix = form.elements.namedItem("pareto_mix") as HTMLInputElement | null;
  mix?.addEventListener("input", () => {
    const out = document.getElementById("pareto-mix-value");
    if (out) out.textContent = mix.value;
  });
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!state.upload) return;
    const values: Record<string, string> = {};
    for (const element of Array.from(form.elements)) {
      const field = element as HTMLInputElement;
      if (field.name) values[field.name] = field.value;
    }
    state.draft = draftFromInputs(values, state.draft);
    try {
      const { run_id } = await client.createRun(state.upload.panel_id, state.draft);
      const record = await client.getRun(run_id);
      state.history = appendRun(state.history, record);
      state.lastRejection = null;
      renderMain();
      if (record.status === "done") {
        window.location.hash = `#/run/${run_id}`;
      }
    } catch (err) {
      state.lastRejection =
        err instanceof ApiError ? err.rejection : { message: String(err) };
      renderMain();
      bindSuggestionButton();
    }
  });
  bindSuggestionButton();
}

function bindSuggestionButton(): void {
  const button = document.getElementById("apply-suggestion");
  if (!button) return;
  button.addEventListener("click", () => {
    const recommended = parseInt(button.dataset["recommended"] ?? "", 10);
    if (Number.isFinite(recommended)) {
      state.draft = applyClusterSuggestion(state.draft, { minimum: 0, recommended });
      state.lastRejection = null;
      renderMain();
    }
  });
}

function route(): void {
  const hash = window.location.hash;
  const match = hash.match(/^#\/run\/(.+)$/);
  if (match && match[1]) {
    void renderReport(decodeURIComponent(match[1]));
  } else {
    renderMain();
  }
}

window.addEventListener("hashchange", route);
window.addEventListener("DOMContentLoaded", route);
