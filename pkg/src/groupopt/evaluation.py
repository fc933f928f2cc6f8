"""Run reports: balance tables, meeting curves, bound comparisons, and the
random baseline used to sanity-check the optimiser."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import metrics
from .allocator import random_plan
from .metrics import BoundsReport, MeetingLedger
from .model import AllocationPlan, Panel, RunConfig, TableLayout


@dataclass(frozen=True)
class RunReport:
    """Everything a facilitator needs to judge one allocation run.

    meeting_curves has one row per round: element 0 counts pairs that
    have never met so far, element m (m >= 1) counts pairs that met at
    least m times so far. excess is None for runs with clustering
    constraints, where the meeting bound is not meaningful.
    """

    per_round_balance: tuple[dict[str, tuple[float, ...]], ...]
    mean_distance: float
    meeting_curves: tuple[tuple[int, ...], ...]
    geometric_score: float
    bounds: BoundsReport
    excess: Optional[float]
    first_meeting_fraction: Optional[float]

    @property
    def unmet_pairs(self) -> int:
        return self.meeting_curves[-1][0]


def build_report(
    plan: AllocationPlan, panel: Panel, layout: TableLayout, config: RunConfig
) -> RunReport:
    balance = []
    for round_alloc in plan.rounds:
        per_demo: dict[str, tuple[float, ...]] = {}
        for demo in panel.demographics:
            per_demo[demo.name] = tuple(
                metrics.table_distance(round_alloc, panel, t, demo.name)
                for t in range(layout.num_tables)
            )
        balance.append(per_demo)

    ledger = MeetingLedger(panel.ids)
    histograms = []
    for round_alloc in plan.rounds:
        ledger.add_round(round_alloc)
        histograms.append(ledger.count_histogram())

    n_pairs = metrics.pairs_total(panel.size)
    max_count = max(histograms[-1], default=0)
    curves = []
    for hist in histograms:
        met = sum(hist.values())
        row = [n_pairs - met]
        for m in range(1, max_count + 1):
            row.append(sum(f for c, f in hist.items() if c >= m))
        curves.append(tuple(row))

    run_bounds = metrics.bounds(layout, config.num_rounds)
    has_clusters = bool(panel.cluster_agents())
    excess = None
    if not has_clusters:
        excess = (curves[-1][0] - run_bounds.min_unmet_pairs) / n_pairs
    first_fraction = None
    if run_bounds.max_first_meetings > 0:
        first_fraction = ledger.met_pairs() / run_bounds.max_first_meetings

    return RunReport(
        per_round_balance=tuple(balance),
        mean_distance=metrics.mean_distance(plan, panel),
        meeting_curves=tuple(curves),
        geometric_score=metrics.geometric_meeting_score(ledger, config.saturation_base),
        bounds=run_bounds,
        excess=excess,
        first_meeting_fraction=first_fraction,
    )


@dataclass(frozen=True)
class BalanceOffender:
    round_index: int
    table: int
    demographic: str
    value: str
    deviation: float
    slack: float


@dataclass(frozen=True)
class BalanceCheck:
    passed: bool
    tolerance: float
    worst: Optional[BalanceOffender]


def balance_tolerance_check(
    plan: AllocationPlan, panel: Panel, tolerance: float
) -> BalanceCheck:
    """Whether every table in every round holds every demographic value
    within ``tolerance`` of its panel share, after allowing for the
    1/table_size slack that integer seat counts force."""
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    worst: Optional[BalanceOffender] = None
    worst_margin = -np.inf
    for k, round_alloc in enumerate(plan.rounds):
        tables = sorted(set(round_alloc.values()))
        for t in tables:
            members = metrics.table_members(round_alloc, t)
            slack = 1.0 / len(members)
            for demo in panel.demographics:
                panel_counts = panel.value_counts(demo.name)
                holders = {v: 0 for v in demo.values}
                for pid in members:
                    value = panel.participant(pid).demographics.get(demo.name)
                    if value in holders:
                        holders[value] += 1
                for value in demo.values:
                    deviation = abs(
                        holders[value] / len(members) - panel_counts[value] / panel.size
                    )
                    margin = deviation - slack
                    if margin > worst_margin:
                        worst_margin = margin
                        worst = BalanceOffender(
                            round_index=k, table=t, demographic=demo.name,
                            value=value, deviation=deviation, slack=slack,
                        )
    passed = worst is None or worst.deviation <= tolerance + worst.slack + 1e-12
    return BalanceCheck(passed=passed, tolerance=tolerance, worst=worst)


@dataclass(frozen=True)
class BaselineSummary:
    num_seeds: int
    geometric_score_mean: float
    geometric_score_min: float
    geometric_score_max: float
    mean_distance_mean: float
    mean_distance_min: float
    mean_distance_max: float


def random_baseline(
    panel: Panel, layout: TableLayout, config: RunConfig, num_seeds: int
) -> BaselineSummary:
    """Distribution of scores over constraint-respecting uniformly random
    allocations (no swap sweeps), seeded deterministically off the run seed."""
    if num_seeds < 1:
        raise ValueError("need at least one baseline seed")
    scores = []
    distances = []
    for i in range(num_seeds):
        rng = np.random.default_rng(np.random.SeedSequence((config.rng_seed, i)))
        plan, ledger = random_plan(panel, layout, config, rng)
        scores.append(metrics.geometric_meeting_score(ledger, config.saturation_base))
        distances.append(metrics.mean_distance(plan, panel))
    return BaselineSummary(
        num_seeds=num_seeds,
        geometric_score_mean=float(np.mean(scores)),
        geometric_score_min=float(np.min(scores)),
        geometric_score_max=float(np.max(scores)),
        mean_distance_mean=float(np.mean(distances)),
        mean_distance_min=float(np.min(distances)),
        mean_distance_max=float(np.max(distances)),
    )
