"""Command line interface: allocate, evaluate, bench.

Exit codes: 0 success, 1 I/O failure, 2 invalid panel or configuration.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import __version__, datasets
from .allocator import run
from .evaluation import RunReport, build_report, random_baseline
from .io import (
    ColumnSpec,
    IoError,
    load_config,
    load_panel,
    read_allocations,
    report_to_json,
    write_allocations,
    write_report,
)
from .model import (
    ClusterCapacityError,
    ConfigError,
    GroupOptError,
    Panel,
    RunConfig,
    check_plan,
    default_table_count,
    suggest_cluster_tables,
    validate_config,
    validate_panel,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2

BASELINE_DRAWS = 30


def _env_seed() -> int:
    raw = os.environ.get("GROUPOPT_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        print(f"warning: ignoring non-integer GROUPOPT_SEED={raw!r}", file=sys.stderr)
        return 0


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    overrides = {}
    for flag, field in (
        ("seed", "rng_seed"),
        ("rounds", "num_rounds"),
        ("tables", "num_tables"),
        ("cluster_tables", "num_cluster_tables"),
        ("swap_rounds", "swap_rounds"),
        ("pareto_mix", "pareto_mix"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    return dataclasses.replace(config, **overrides) if overrides else config


def _print_issues(issues) -> bool:
    """Print validation issues; returns True when any is an error."""
    has_error = False
    for issue in issues:
        print(f"{issue.severity}: {issue.message}", file=sys.stderr)
        has_error = has_error or issue.is_error
    return has_error


def _print_summary(report: RunReport) -> None:
    print(f"mean balance distance : {report.mean_distance:.4f}")
    print(f"geometric score       : {report.geometric_score:.4f}")
    print(f"unmet pairs           : {report.unmet_pairs} of {report.bounds.pairs_total}")
    if report.excess is None:
        print("excess                : n/a (clustering)")
    else:
        print(f"excess                : {report.excess:.4f}")
    if report.first_meeting_fraction is not None:
        print(f"first meetings        : {report.first_meeting_fraction:.1%} of the maximum possible")


def _load_inputs(args) -> tuple[RunConfig, ColumnSpec, Panel]:
    config, columns = load_config(args.config, default_seed=_env_seed())
    config = _apply_overrides(config, args)
    panel = load_panel(args.panel, columns)
    return config, columns, panel


def cmd_allocate(args) -> int:
    config, columns, panel = _load_inputs(args)
    if _print_issues(validate_panel(panel, config.num_tables)):
        return EXIT_INVALID
    try:
        layout = validate_config(panel, config)
    except ClusterCapacityError as e:
        print(f"error: {e}", file=sys.stderr)
        print(
            f"suggestion: set cluster tables to at least {e.minimum} "
            f"(recommended {e.recommended})",
            file=sys.stderr,
        )
        return EXIT_INVALID
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID

    plan, _ = run(panel, config)
    report = build_report(plan, panel, layout, config)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_allocations(plan, layout, out / "allocations.csv")
    write_report(report, config, out / "report.json", panel=panel, columns=columns)
    print(f"wrote {out / 'allocations.csv'} and {out / 'report.json'}")
    _print_summary(report)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config, columns, panel = _load_inputs(args)
    try:
        layout = validate_config(panel, config)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    plan = read_allocations(args.allocations)
    try:
        check_plan(plan, panel, layout)
    except ValueError as e:
        print(f"error: allocation file violates plan invariants: {e}", file=sys.stderr)
        return EXIT_INVALID
    report = build_report(plan, panel, layout, config)
    if args.out:
        write_report(report, config, args.out, panel=panel, columns=columns)
        print(f"wrote {args.out}")
        _print_summary(report)
    else:
        print(report_to_json(report, config, panel=panel, columns=columns), end="")
    return EXIT_OK


DEFAULT_SUITE = {
    "seeds": 10,
    "rounds": [3, 5, 10],
    "table_deltas": [-1, 0, 1],
    "datasets": [
        {"name": "synth30", "instance": "synth30", "clustered": False},
        {"name": "synth60", "instance": "synth60", "clustered": False},
    ],
}


def _suite_panel(entry: dict) -> tuple[Panel, bool]:
    clustered = bool(entry.get("clustered", False))
    if "instance" in entry:
        panel = datasets.instance_panel(
            entry["instance"], clustered=clustered, seed=int(entry.get("data_seed", 0))
        )
        return panel, clustered
    config_path = entry.get("config")
    panel_path = entry.get("panel")
    if not panel_path or not config_path:
        raise GroupOptError(
            "suite dataset needs either an 'instance' name or 'panel' + 'config' paths"
        )
    _, columns = load_config(config_path)
    panel = load_panel(panel_path, columns)
    return panel, bool(panel.cluster_agents())


def cmd_bench(args) -> int:
    if args.suite:
        with open(args.suite, "r", encoding="utf-8") as f:
            suite = json.load(f)
    else:
        suite = DEFAULT_SUITE
    seeds = int(args.seeds if args.seeds is not None else suite.get("seeds", 10))
    if seeds < 1:
        print("error: need at least one seed per cell", file=sys.stderr)
        return EXIT_INVALID
    rounds_grid = suite.get("rounds", [3, 5, 10])
    deltas = suite.get("table_deltas", [-1, 0, 1])
    entries = suite.get("datasets", [])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result_rows: list[dict] = []
    summary_rows: list[dict] = []
    curves: dict[str, list[list[int]]] = {}
    failures: list[str] = []

    for entry in entries:
        name = entry.get("name") or entry.get("instance") or entry.get("panel")
        try:
            panel, clustered = _suite_panel(entry)
        except (GroupOptError, OSError, ValueError, json.JSONDecodeError) as e:
            failures.append(f"{name}: {e}")
            continue
        base_tables = default_table_count(panel.size)
        for delta in deltas:
            num_tables = base_tables + int(delta)
            if not 1 <= num_tables <= panel.size:
                failures.append(f"{name}: skipped infeasible table count {num_tables}")
                continue
            for num_rounds in rounds_grid:
                cell = f"{name}-J{num_tables}-K{num_rounds}"
                try:
                    rows, summary, cell_curves = _run_cell(
                        panel, clustered, num_tables, int(num_rounds), seeds, name
                    )
                except (GroupOptError, ValueError) as e:
                    failures.append(f"{cell}: {e}")
                    continue
                result_rows.extend(rows)
                summary_rows.append(summary)
                curves[cell] = cell_curves

    _write_csv(out / "results.csv", result_rows, [
        "dataset", "tables", "rounds", "clustered", "seed",
        "geometric_score", "mean_distance", "unmet_pairs", "excess",
        "first_meeting_fraction",
    ])
    _write_csv(out / "summary.csv", summary_rows, [
        "dataset", "tables", "rounds", "clustered", "seeds",
        "geometric_score_mean", "mean_distance_mean", "excess_mean",
        "baseline_score_mean", "baseline_score_min", "baseline_score_max",
        "baseline_distance_mean",
    ])
    with open(out / "curves.json", "w", encoding="utf-8") as f:
        json.dump(curves, f, indent=2)
        f.write("\n")
    excess_rows = [r for r in result_rows if r["excess"] != ""]
    _write_csv(out / "excess.csv", excess_rows, [
        "dataset", "tables", "rounds", "clustered", "seed",
        "geometric_score", "mean_distance", "unmet_pairs", "excess",
        "first_meeting_fraction",
    ])

    for failure in failures:
        print(f"failed: {failure}", file=sys.stderr)
    print(
        f"ran {len(summary_rows)} cells x {seeds} seeds; "
        f"wrote results under {out}"
    )
    return EXIT_IO if failures else EXIT_OK


def _run_cell(panel, clustered, num_tables, num_rounds, seeds, name):
    cluster_tables = 0
    if clustered:
        probe = RunConfig(num_tables=num_tables, num_rounds=num_rounds)
        cluster_tables, _ = suggest_cluster_tables(panel, probe)
    rows = []
    scores, distances, excesses = [], [], []
    cell_curves: list[list[int]] = []
    layout = None
    for seed in range(seeds):
        config = RunConfig(
            num_tables=num_tables,
            num_rounds=num_rounds,
            num_cluster_tables=cluster_tables,
            rng_seed=seed,
        )
        layout = validate_config(panel, config)
        plan, _ = run(panel, config)
        report = build_report(plan, panel, layout, config)
        scores.append(report.geometric_score)
        distances.append(report.mean_distance)
        if report.excess is not None:
            excesses.append(report.excess)
        if seed == 0:
            cell_curves = [list(row) for row in report.meeting_curves]
        rows.append({
            "dataset": name,
            "tables": num_tables,
            "rounds": num_rounds,
            "clustered": clustered,
            "seed": seed,
            "geometric_score": report.geometric_score,
            "mean_distance": report.mean_distance,
            "unmet_pairs": report.unmet_pairs,
            "excess": "" if report.excess is None else report.excess,
            "first_meeting_fraction": (
                "" if report.first_meeting_fraction is None
                else report.first_meeting_fraction
            ),
        })
    baseline = random_baseline(
        panel, layout,
        RunConfig(
            num_tables=num_tables, num_rounds=num_rounds,
            num_cluster_tables=cluster_tables, rng_seed=0,
        ),
        BASELINE_DRAWS,
    )
    summary = {
        "dataset": name,
        "tables": num_tables,
        "rounds": num_rounds,
        "clustered": clustered,
        "seeds": seeds,
        "geometric_score_mean": sum(scores) / len(scores),
        "mean_distance_mean": sum(distances) / len(distances),
        "excess_mean": sum(excesses) / len(excesses) if excesses else "",
        "baseline_score_mean": baseline.geometric_score_mean,
        "baseline_score_min": baseline.geometric_score_min,
        "baseline_score_max": baseline.geometric_score_max,
        "baseline_distance_mean": baseline.mean_distance_mean,
    }
    return rows, summary, cell_curves


def _write_csv(path: Path, rows: list[dict], fieldnames: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groupopt",
        description="Allocate deliberative-panel participants to discussion tables.",
    )
    parser.add_argument("--version", action="version", version=f"groupopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_alloc = sub.add_parser("allocate", help="run the allocator and write outputs")
    p_alloc.add_argument("--panel", required=True, help="panel CSV file")
    p_alloc.add_argument("--config", required=True, help="config JSON file")
    p_alloc.add_argument("--out", required=True, help="output directory")
    p_alloc.add_argument("--seed", type=int, help="override rng seed")
    p_alloc.add_argument("--rounds", type=int, help="override number of rounds")
    p_alloc.add_argument("--tables", type=int, help="override number of tables")
    p_alloc.add_argument("--cluster-tables", dest="cluster_tables", type=int,
                         help="override number of cluster tables")
    p_alloc.add_argument("--swap-rounds", dest="swap_rounds", type=int,
                         help="override number of swap sweeps")
    p_alloc.add_argument("--pareto-mix", dest="pareto_mix", type=float,
                         help="override the balance/meeting mixing probability")
    p_alloc.set_defaults(handler=cmd_allocate)

    p_eval = sub.add_parser(
        "evaluate", help="recompute a report from an existing allocation file"
    )
    p_eval.add_argument("--allocations", required=True, help="allocation CSV file")
    p_eval.add_argument("--panel", required=True, help="panel CSV file")
    p_eval.add_argument("--config", required=True, help="config JSON file")
    p_eval.add_argument("--out", help="report destination (default: print JSON)")
    p_eval.set_defaults(handler=cmd_evaluate)

    p_bench = sub.add_parser("bench", help="run an experiment grid")
    p_bench.add_argument("--suite", help="grid spec JSON (default: built-in grid)")
    p_bench.add_argument("--seeds", type=int, help="seeds per cell")
    p_bench.add_argument("--out", required=True, help="output directory")
    p_bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (IoError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except GroupOptError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
