/** HTML renderers for the three screens. Pure string builders; event
 * wiring lives in main.ts. */

import { balanceHeatmapHtml, curveChartSvg, escapeHtml, headline } from "./charts.js";
import type { SessionState } from "./state.js";
import type { ApiRejection, RunRecord, ValidationIssue } from "./types.js";

const ISSUE_HINTS: Record<string, string> = {
  "too-many-values":
    "Merge granular levels into broader groups (for example cities into regions) before allocating.",
  "unspreadable-value":
    "Too few holders to put one on every table; expect that value to be missing from some tables.",
  "missing-value": "Fill the empty cell or drop the column from the demographic list.",
  "duplicate-id": "Every row needs its own id; de-duplicate the id column.",
  "degenerate-demographic":
    "A column with a single value cannot be balanced; drop it from the demographic list.",
  "undeclared-value": "Check for typos in the cell values.",
  "panel-too-small": "At least two participants are needed.",
};

export function issuesHtml(issues: ValidationIssue[]): string {
  if (issues.length === 0) {
    return '<p class="ok">No issues: the panel looks good.</p>';
  }
  const items = issues.map((issue) => {
    const hint = ISSUE_HINTS[issue.code];
    return (
      `<li class="${issue.severity}"><strong>${issue.severity}</strong>: ` +
      `${escapeHtml(issue.message)}` +
      (hint ? `<br><em>${escapeHtml(hint)}</em>` : "") +
      "</li>"
    );
  });
  return `<ul class="issues">${items.join("")}</ul>`;
}

export function rejectionHtml(rejection: ApiRejection): string {
  const parts = [
    `<div class="rejection"><p><strong>The server rejected the request:</strong> ` +
      `${escapeHtml(rejection.message)}</p>`,
  ];
  if (rejection.issues?.length) {
    parts.push(issuesHtml(rejection.issues));
  }
  if (rejection.suggestion) {
    parts.push(
      `<p>Suggested cluster tables: minimum ${rejection.suggestion.minimum}, ` +
        `recommended ${rejection.suggestion.recommended} ` +
        `<button id="apply-suggestion" data-recommended="${rejection.suggestion.recommended}">` +
        `Apply ${rejection.suggestion.recommended}</button></p>`,
    );
  }
  parts.push("</div>");
  return parts.join("");
}

export function uploadViewHtml(state: SessionState): string {
  const upload = state.upload;
  return `
<section id="upload-view">
  <h2>1. Upload a panel</h2>
  <form id="upload-form">
    <label>Panel CSV <input type="file" id="panel-file" accept=".csv,text/csv" required></label>
    <details>
      <summary>Column roles</summary>
      <label>id column <input name="idColumn" value="id"></label>
      <label>demographic columns (comma separated, blank = all others)
        <input name="demographicColumns" placeholder="gender,age"></label>
      <label>cluster column <input name="clusterColumn" placeholder="consent"></label>
      <label>cluster value <input name="clusterValue" placeholder="no"></label>
      <label>manual column <input name="manualColumn" placeholder="pin"></label>
    </details>
    <button type="submit">Upload</button>
  </form>
  <div id="upload-result">
    ${
      upload
        ? `<p class="ok">Panel <code>${escapeHtml(upload.panel_id)}</code>: ` +
          `${upload.participants} participants, ` +
          `${upload.demographics.length} demographics` +
          (upload.cluster_agents > 0 ? `, ${upload.cluster_agents} to cluster` : "") +
          `.</p>` +
          issuesHtml(upload.issues)
        : ""
    }
  </div>
</section>`;
}

export function configureViewHtml(state: SessionState): string {
  if (!state.upload) {
    return '<section id="configure-view"><h2>2. Configure and run</h2><p>Upload a panel first.</p></section>';
  }
  const draft = state.draft;
  const suggestions = state.upload.suggestions;
  return `
<section id="configure-view">
  <h2>2. Configure and run</h2>
  <p class="hint">Server suggestions: ${suggestions.default_tables} tables` +
    (state.upload.cluster_agents > 0
      ? `, cluster tables minimum ${suggestions.min_cluster_tables} ` +
        `(recommended ${suggestions.recommended_cluster_tables})`
      : "") +
    `.</p>
  <form id="run-form">
    <label>tables <input type="number" name="num_tables" min="1" value="${draft.num_tables}"></label>
    <label>cluster tables <input type="number" name="num_cluster_tables" min="0" id="cluster-tables-input" value="${draft.num_cluster_tables}"></label>
    <label>rounds <input type="number" name="num_rounds" min="1" value="${draft.num_rounds}"></label>
    <label>swap sweeps <input type="number" name="swap_rounds" min="1" value="${draft.swap_rounds}"></label>
    <label>balance/meeting mix
      <input type="range" name="pareto_mix" min="0" max="1" step="0.05" value="${draft.pareto_mix}">
      <output id="pareto-mix-value">${draft.pareto_mix}</output>
    </label>
    <label>seed <input type="number" name="rng_seed" min="0" value="${draft.rng_seed}"></label>
    <button type="submit">Run allocation</button>
  </form>
  <div id="run-result">${state.lastRejection ? rejectionHtml(state.lastRejection) : ""}</div>
</section>`;
}

export function historyHtml(state: SessionState): string {
  if (state.history.length === 0) {
    return '<section id="history-view"><h2>3. Runs</h2><p>No runs yet.</p></section>';
  }
  const rows = state.history
    .map(
      (r) =>
        `<tr><td><a href="#/run/${encodeURIComponent(r.runId)}">${escapeHtml(
          r.runId.slice(0, 8),
        )}</a></td>` +
        `<td>${r.tables}</td><td>${r.clusterTables}</td><td>${r.rounds}</td><td>${r.seed}</td>` +
        `<td>${r.meanDistance.toFixed(4)}</td><td>${r.geometricScore.toFixed(2)}</td>` +
        `<td>${r.unmetPairs}</td>` +
        `<td>${r.excess === null ? "n/a" : r.excess.toFixed(4)}</td></tr>`,
    )
    .join("");
  return `
<section id="history-view">
  <h2>3. Runs</h2>
  <table class="history">
    <thead><tr><th>run</th><th>tables</th><th>cluster</th><th>rounds</th><th>seed</th>
      <th>mean distance</th><th>score</th><th>unmet</th><th>excess</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>
</section>`;
}

export function notFoundHtml(runId: string): string {
  return `
<section class="not-found">
  <h2>Run not found</h2>
  <p>No run with id <code>${escapeHtml(runId)}</code>. It may belong to an
  earlier server session (runs are kept in memory only).</p>
  <p><a href="#/">Back to the panel</a></p>
</section>`;
}

export function reportViewHtml(record: RunRecord, allocationsUrl: string): string {
  if (record.status === "pending") {
    return `<section><h2>Run ${escapeHtml(record.run_id.slice(0, 8))}</h2>
<p>Still running; refresh shortly.</p></section>`;
  }
  if (record.status === "failed" || record.report === null) {
    return `<section><h2>Run ${escapeHtml(record.run_id.slice(0, 8))}</h2>
<p class="error">The run failed: ${escapeHtml(record.error?.message ?? "unknown error")}</p>
<p><a href="#/">Back to the panel</a></p></section>`;
  }
  const report = record.report;
  const metrics = headline(report);
  return `
<section id="report-view">
  <h2>Run ${escapeHtml(record.run_id.slice(0, 8))}</h2>
  <p><a href="#/">&larr; configure another run</a>
     &middot; <a href="${allocationsUrl}" download="allocations.csv">download allocations</a></p>
  <dl class="headline">
    <dt>mean balance distance</dt><dd id="headline-distance">${metrics.meanDistance}</dd>
    <dt>meeting score</dt><dd id="headline-score">${metrics.geometricScore}</dd>
    <dt>unmet pairs</dt><dd id="headline-unmet">${metrics.unmetPairs}</dd>
    <dt>excess</dt><dd id="headline-excess">${metrics.excess}</dd>
    <dt>first meetings</dt><dd id="headline-first">${metrics.firstMeetings}</dd>
  </dl>
  <h3>Meeting curves</h3>
  <p class="hint">Line 0: pairs that have never met. Line m: pairs that met at
  least m times by each round.</p>
  ${curveChartSvg(report.meeting_curves)}
  <h3>Balance by table and demographic</h3>
  <p class="hint">Each cell is the distance between the table's distribution
  and the whole panel's (0 = mirror image).</p>
  ${balanceHeatmapHtml(report.per_round_balance)}
</section>`;
}
