"""File formats: panel CSV, config JSON, allocation CSV, report JSON.

Field names and conventions are documented in SCHEMAS.md at the repo
root. Table and round numbers are 1-based in every file; the package
uses 0-based indices internally.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from io import StringIO
from typing import Optional, Union

from .evaluation import RunReport
from .model import AllocationPlan, Demographic, GroupOptError, Panel, Participant, RunConfig, TableLayout

Pathish = Union[str, os.PathLike]


class ParseError(GroupOptError):
    pass


class SchemaError(GroupOptError):
    pass


class DuplicateIdError(GroupOptError):
    pass


class IoError(GroupOptError):
    pass


REPORT_SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class ColumnSpec:
    """How to read the panel file: which columns play which role, plus
    the per-round pin overrides a CSV column cannot express.

    demographic_columns = None means every column other than the id,
    cluster, and manual columns diversifies. manual_overrides maps
    participant id -> {0-based round -> 0-based table}; the config file
    carries both as 1-based.
    """

    id_column: str = "id"
    demographic_columns: Optional[tuple[str, ...]] = None
    cluster_column: Optional[str] = None
    cluster_value: Optional[str] = None
    manual_column: Optional[str] = None
    delimiter: str = ","
    manual_overrides: dict = field(default_factory=dict)


_CONFIG_KEYS = {
    "id_column", "demographic_columns", "cluster_column", "cluster_value",
    "manual_column", "delimiter", "manual_overrides",
    "num_tables", "num_cluster_tables", "num_rounds", "swap_rounds",
    "pareto_mix", "saturation_base", "rng_seed", "meeting_weighting",
}


def load_config(path: Pathish, *, default_seed: int = 0) -> tuple[RunConfig, ColumnSpec]:
    """Parse the JSON config document into run parameters and column roles.

    ``default_seed`` applies only when the document has no rng_seed key
    (the CLI feeds the GROUPOPT_SEED environment variable through here).
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as e:
        raise IoError(f"cannot read config file: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"config file is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise SchemaError("config file must contain a JSON object")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise SchemaError(f"unknown config keys: {', '.join(unknown)}")
    for key in ("num_tables", "num_rounds"):
        if key not in raw:
            raise SchemaError(f"config is missing required key {key!r}")
    if ("cluster_column" in raw) != ("cluster_value" in raw):
        raise SchemaError("cluster_column and cluster_value must be given together")

    demo_cols = raw.get("demographic_columns")
    if demo_cols is not None:
        if not isinstance(demo_cols, list) or not all(isinstance(c, str) for c in demo_cols):
            raise SchemaError("demographic_columns must be a list of column names")
        demo_cols = tuple(demo_cols)
    overrides: dict = {}
    raw_overrides = raw.get("manual_overrides", {})
    if not isinstance(raw_overrides, dict):
        raise SchemaError("manual_overrides must map participant ids to {round: table}")
    for pid, per_round in raw_overrides.items():
        if not isinstance(per_round, dict):
            raise SchemaError(f"manual_overrides[{pid!r}] must map rounds to tables")
        try:
            overrides[str(pid)] = {
                int(round_no) - 1: int(table) - 1 for round_no, table in per_round.items()
            }
        except (TypeError, ValueError) as e:
            raise SchemaError(f"manual_overrides[{pid!r}] has a non-numeric entry: {e}") from e
        if any(k < 0 or t < 0 for k, t in overrides[str(pid)].items()):
            raise SchemaError(f"manual_overrides[{pid!r}]: rounds and tables start at 1")
    columns = ColumnSpec(
        id_column=str(raw.get("id_column", "id")),
        demographic_columns=demo_cols,
        cluster_column=raw.get("cluster_column"),
        cluster_value=None if raw.get("cluster_value") is None else str(raw["cluster_value"]),
        manual_column=raw.get("manual_column"),
        delimiter=str(raw.get("delimiter", ",")),
        manual_overrides=overrides,
    )
    try:
        config = RunConfig(
            num_tables=int(raw["num_tables"]),
            num_rounds=int(raw["num_rounds"]),
            num_cluster_tables=int(raw.get("num_cluster_tables", 0)),
            swap_rounds=int(raw.get("swap_rounds", 5)),
            pareto_mix=float(raw.get("pareto_mix", 0.5)),
            saturation_base=float(raw.get("saturation_base", 0.5)),
            rng_seed=int(raw.get("rng_seed", default_seed)),
            meeting_weighting=str(raw.get("meeting_weighting", "counts")),
        )
    except (TypeError, ValueError) as e:
        raise SchemaError(f"config value has the wrong type: {e}") from e
    return config, columns


def parse_panel_text(text: str, columns: ColumnSpec) -> Panel:
    """Build a Panel from delimiter-separated text with a header row.

    Demographic value sets are inferred from observed values in
    first-appearance order, so proportions and iteration order are
    reproducible from the file alone.
    """
    reader = csv.reader(text.splitlines(), delimiter=columns.delimiter)
    rows = list(reader)
    if not rows:
        raise ParseError("panel file is empty")
    header = rows[0]
    if len(set(header)) != len(header):
        raise SchemaError("panel header contains duplicate column names")
    position = {name: i for i, name in enumerate(header)}

    if columns.id_column not in position:
        raise SchemaError(f"panel file has no id column {columns.id_column!r}")
    special = {columns.id_column}
    for name in (columns.cluster_column, columns.manual_column):
        if name is not None:
            if name not in position:
                raise SchemaError(f"panel file has no column {name!r}")
            special.add(name)
    if columns.demographic_columns is None:
        demo_names = tuple(name for name in header if name not in special)
    else:
        for name in columns.demographic_columns:
            if name not in position:
                raise SchemaError(f"panel file has no demographic column {name!r}")
        demo_names = tuple(columns.demographic_columns)

    observed: dict[str, list[str]] = {name: [] for name in demo_names}
    participants = []
    seen_ids = set()
    for line_no, row in enumerate(rows[1:], start=2):
        if not row or all(cell == "" for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(
                f"line {line_no}: expected {len(header)} fields, found {len(row)}"
            )
        pid = row[position[columns.id_column]].strip()
        if not pid:
            raise ParseError(f"line {line_no}: empty participant id")
        if pid in seen_ids:
            raise DuplicateIdError(f"line {line_no}: duplicate participant id {pid!r}")
        seen_ids.add(pid)

        values: dict[str, str] = {}
        for name in demo_names:
            value = row[position[name]].strip()
            values[name] = value
            if value and value not in observed[name]:
                observed[name].append(value)
        if columns.cluster_column is not None and columns.cluster_column not in values:
            values[columns.cluster_column] = row[position[columns.cluster_column]].strip()

        manual = None
        if columns.manual_column is not None:
            cell = row[position[columns.manual_column]].strip()
            if cell:
                try:
                    manual = int(cell) - 1
                except ValueError:
                    raise ParseError(
                        f"line {line_no}: manual table {cell!r} is not a table number"
                    ) from None
        participants.append(Participant(id=pid, demographics=values, manual_table=manual))

    cluster = None
    if columns.cluster_column is not None:
        cluster = (columns.cluster_column, columns.cluster_value)
    return Panel(
        participants=tuple(participants),
        demographics=tuple(Demographic(name, tuple(observed[name])) for name in demo_names),
        cluster_demographic=cluster,
        manual_overrides=columns.manual_overrides,
    )


def load_panel(path: Pathish, columns: ColumnSpec) -> Panel:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            text = f.read()
    except OSError as e:
        raise IoError(f"cannot read panel file: {e}") from e
    return parse_panel_text(text, columns)


def write_panel(panel: Panel, path: Pathish, columns: ColumnSpec) -> None:
    """Inverse of load_panel for the columns the panel actually carries."""
    header = [columns.id_column] + [d.name for d in panel.demographics]
    if columns.cluster_column is not None and columns.cluster_column not in header:
        header.append(columns.cluster_column)
    if columns.manual_column is not None:
        header.append(columns.manual_column)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, delimiter=columns.delimiter, lineterminator="\n")
            writer.writerow(header)
            for p in panel.participants:
                row = [p.id] + [p.demographics.get(d.name, "") for d in panel.demographics]
                if columns.cluster_column is not None and columns.cluster_column not in (
                    d.name for d in panel.demographics
                ):
                    row.append(p.demographics.get(columns.cluster_column, ""))
                if columns.manual_column is not None:
                    row.append("" if p.manual_table is None else str(p.manual_table + 1))
                writer.writerow(row)
    except OSError as e:
        raise IoError(f"cannot write panel file: {e}") from e


ALLOCATION_HEADER = ("round", "id", "table", "cluster_table")


def allocation_rows(plan: AllocationPlan, layout: TableLayout) -> list[tuple[int, str, int, bool]]:
    """(round, id, table, is_cluster_table) rows, 1-based and ordered by
    (round, table, id)."""
    rows = []
    for k, round_alloc in enumerate(plan.rounds):
        for pid, table in sorted(round_alloc.items(), key=lambda kv: (kv[1], kv[0])):
            rows.append((k + 1, pid, table + 1, layout.is_cluster_table(table)))
    return rows


def allocations_to_csv(plan: AllocationPlan, layout: TableLayout) -> str:
    buffer = StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(ALLOCATION_HEADER)
    for k, pid, table, is_cluster in allocation_rows(plan, layout):
        writer.writerow([k, pid, table, "true" if is_cluster else "false"])
    return buffer.getvalue()


def write_allocations(
    plan: AllocationPlan, layout: TableLayout, path: Pathish
) -> None:
    """Long-format CSV, one row per (round, participant), ordered by
    (round, table, id). Byte-identical for identical plans."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(allocations_to_csv(plan, layout))
    except OSError as e:
        raise IoError(f"cannot write allocations: {e}") from e


def read_allocations(path: Pathish) -> AllocationPlan:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            rows = list(reader)
    except OSError as e:
        raise IoError(f"cannot read allocations: {e}") from e
    if not rows or tuple(rows[0][:3]) != ALLOCATION_HEADER[:3]:
        raise SchemaError(
            f"allocation file must start with header {','.join(ALLOCATION_HEADER[:3])}"
        )
    rounds: dict[int, dict[str, int]] = {}
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            k = int(row[0]) - 1
            table = int(row[2]) - 1
        except (ValueError, IndexError) as e:
            raise ParseError(f"line {line_no}: malformed allocation row") from e
        if k < 0 or table < 0:
            raise ParseError(f"line {line_no}: rounds and tables are numbered from 1")
        rounds.setdefault(k, {})[row[1]] = table
    if sorted(rounds) != list(range(len(rounds))):
        raise ParseError("allocation file has gaps in its round numbers")
    return AllocationPlan(rounds=tuple(rounds[k] for k in sorted(rounds)))


def report_to_dict(
    report: RunReport,
    config: RunConfig,
    *,
    panel: Optional[Panel] = None,
    columns: Optional[ColumnSpec] = None,
) -> dict:
    doc: dict = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": {
            "num_tables": config.num_tables,
            "num_cluster_tables": config.num_cluster_tables,
            "num_rounds": config.num_rounds,
            "swap_rounds": config.swap_rounds,
            "pareto_mix": config.pareto_mix,
            "saturation_base": config.saturation_base,
            "rng_seed": config.rng_seed,
            "meeting_weighting": config.meeting_weighting,
        },
    }
    if columns is not None:
        doc["columns"] = {
            "id_column": columns.id_column,
            "demographic_columns": (
                None if columns.demographic_columns is None
                else list(columns.demographic_columns)
            ),
            "cluster_column": columns.cluster_column,
            "cluster_value": columns.cluster_value,
            "manual_column": columns.manual_column,
        }
    if panel is not None:
        doc["panel"] = {
            "participants": panel.size,
            "demographics": [d.name for d in panel.demographics],
            "cluster_agents": len(panel.cluster_agents()),
        }
    doc.update({
        "mean_distance": report.mean_distance,
        "geometric_score": report.geometric_score,
        "per_round_balance": [
            {name: list(dists) for name, dists in per_demo.items()}
            for per_demo in report.per_round_balance
        ],
        "meeting_curves": [list(row) for row in report.meeting_curves],
        "bounds": {
            "pairs_total": report.bounds.pairs_total,
            "meetings_per_round": report.bounds.meetings_per_round,
            "min_repeats": report.bounds.min_repeats,
            "min_unmet_pairs": report.bounds.min_unmet_pairs,
            "max_first_meetings": report.bounds.max_first_meetings,
        },
        "unmet_pairs": report.unmet_pairs,
        "excess": report.excess,
        "excess_reason": (
            None if report.excess is not None else "clustering constraints present"
        ),
        "first_meeting_fraction": report.first_meeting_fraction,
    })
    return doc


def report_to_json(
    report: RunReport,
    config: RunConfig,
    *,
    panel: Optional[Panel] = None,
    columns: Optional[ColumnSpec] = None,
) -> str:
    doc = report_to_dict(report, config, panel=panel, columns=columns)
    return json.dumps(doc, indent=2) + "\n"


def write_report(
    report: RunReport,
    config: RunConfig,
    path: Pathish,
    *,
    panel: Optional[Panel] = None,
    columns: Optional[ColumnSpec] = None,
) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(report_to_json(report, config, panel=panel, columns=columns))
    except OSError as e:
        raise IoError(f"cannot write report: {e}") from e
