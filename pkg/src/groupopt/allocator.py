"""Round construction: constrained random placement plus Pareto swap sweeps.

Each round seats pinned participants first, scatters cluster participants
over the cluster tables, fills the rest at random, then runs a configured
number of swap sweeps. A sweep visits every participant in panel order and
applies at most one swap per visit; a swap is only ever a candidate when it
worsens no demographic's balance on either affected table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

from .metrics import MeetingLedger
from .model import (
    AllocationPlan,
    InfeasibleError,
    Panel,
    RunConfig,
    TableLayout,
    validate_config,
    validate_panel,
)


@dataclass(frozen=True)
class SwapCandidate:
    """A feasible exchange of the visited participant with ``partner``.

    Per-table scores are always >= 0: exchanges that worsen any
    demographic on either table are never constructed. meeting_delta is
    an integer count difference by default and a float utility
    difference under geometric meeting weighting; positive is better
    either way.
    """

    partner: str
    pareto_i_table: int
    pareto_partner_table: int
    combined_pareto: int
    meeting_delta: float


@dataclass(frozen=True)
class SwapEvent:
    """Passed to the on_swap observer after each applied swap."""

    round_index: int
    sweep_index: int
    agent: str
    partner: str
    agent_table: int
    partner_table: int
    before: dict[str, int]
    after: dict[str, int]


SwapObserver = Callable[[SwapEvent], None]


class _RoundEngine:
    """Working state for one round's sweeps.

    Keeps per-table demographic counts and, for every (table, value)
    cell, the integer change in the scaled L1 distance caused by
    removing or adding one holder of that value. Those terms make the
    Pareto sign of a swap an O(1) integer computation, evaluated for
    all partners of a visited participant at once.
    """

    def __init__(
        self,
        panel: Panel,
        layout: TableLayout,
        ledger: MeetingLedger,
        round_alloc: Mapping[str, int],
        *,
        round_index: int = 0,
        meeting_weighting: str = "counts",
        saturation_base: float = 0.5,
    ):
        self.panel = panel
        self.layout = layout
        self.ids = panel.ids
        self.index = {pid: i for i, pid in enumerate(self.ids)}
        self.n = len(self.ids)
        self.num_tables = layout.num_tables

        self.table_of = np.array([round_alloc[pid] for pid in self.ids], dtype=np.int64)
        self.is_cluster = np.array([p.is_cluster for p in panel.participants], dtype=bool)
        pins = panel.manual_for_round(round_index)
        self.is_manual = np.array([p.id in pins for p in panel.participants], dtype=bool)
        self.cluster_table = np.zeros(self.num_tables, dtype=bool)
        for t in layout.cluster_tables:
            self.cluster_table[t] = True

        self.codes: list[np.ndarray] = []
        self.panel_counts: list[np.ndarray] = []
        self.table_counts: list[np.ndarray] = []
        for demo in panel.demographics:
            value_index = {v: k for k, v in enumerate(demo.values)}
            codes = np.array(
                [value_index[p.demographics[demo.name]] for p in panel.participants],
                dtype=np.int64,
            )
            self.codes.append(codes)
            self.panel_counts.append(np.bincount(codes, minlength=len(demo.values)).astype(np.int64))
            counts = np.zeros((self.num_tables, len(demo.values)), dtype=np.int64)
            np.add.at(counts, (self.table_of, codes), 1)
            self.table_counts.append(counts)

        self.sizes = np.array(layout.sizes, dtype=np.int64)
        self.remove_term = [np.zeros_like(c) for c in self.table_counts]
        self.add_term = [np.zeros_like(c) for c in self.table_counts]
        for d in range(len(panel.demographics)):
            for t in range(self.num_tables):
                self._refresh_terms(d, t)

        counts_matrix = ledger.matrix()
        if ledger.ids != self.ids:
            raise ValueError("ledger participant order does not match the panel")
        # Meeting weights per pair: raw prior counts, or the marginal
        # utility a**(count+1) of co-seating the pair once more. The swap
        # delta uses the same gather skeleton either way; the geometric
        # variant flips sign because utilities are gained, not shed.
        if meeting_weighting == "geometric":
            weights = saturation_base ** (counts_matrix + 1.0)
            np.fill_diagonal(weights, 0.0)
            self.meeting_sign = -1.0
        else:
            weights = counts_matrix
            self.meeting_sign = 1
        self.meetings = weights
        onehot = np.zeros((self.n, self.num_tables), dtype=weights.dtype)
        onehot[np.arange(self.n), self.table_of] = 1
        self.mass = weights @ onehot  # meeting weight of each agent toward each table

    def _refresh_terms(self, d: int, t: int) -> None:
        counts = self.table_counts[d][t]
        pan = self.panel_counts[d]
        scaled_target = pan * int(self.sizes[t])
        base = np.abs(counts * self.panel.size - scaled_target)
        self.remove_term[d][t] = np.abs((counts - 1) * self.panel.size - scaled_target) - base
        self.add_term[d][t] = np.abs((counts + 1) * self.panel.size - scaled_target) - base

    def allocation(self) -> dict[str, int]:
        return {pid: int(t) for pid, t in zip(self.ids, self.table_of)}

    def candidates(self, a: int) -> list[SwapCandidate]:
        t_a = int(self.table_of[a])
        mask = (self.table_of != t_a) & ~self.is_manual
        if self.is_cluster[a]:
            mask &= self.cluster_table[self.table_of]
        if not self.cluster_table[t_a]:
            mask &= ~self.is_cluster
        if not mask.any():
            return []

        home_sum = np.zeros(self.n, dtype=np.int64)
        away_sum = np.zeros(self.n, dtype=np.int64)
        for d in range(len(self.codes)):
            codes = self.codes[d]
            v_a = int(codes[a])
            differs = codes != v_a
            home_change = self.remove_term[d][t_a, v_a] + self.add_term[d][t_a, codes]
            home = np.where(differs, -np.sign(home_change), 0)
            away_change = (
                self.remove_term[d][self.table_of, codes]
                + self.add_term[d][self.table_of, v_a]
            )
            away = np.where(differs, -np.sign(away_change), 0)
            mask &= (home >= 0) & (away >= 0)
            home_sum += home
            away_sum += away
            if not mask.any():
                return []

        own_mass = self.mass[np.arange(self.n), self.table_of]
        delta = self.meeting_sign * (
            (self.mass[a, t_a] - self.mass[:, t_a])
            + (own_mass - self.mass[a, self.table_of])
            + 2 * self.meetings[a]
        )

        cast = float if self.meeting_sign == -1.0 else int
        return [
            SwapCandidate(
                partner=self.ids[b],
                pareto_i_table=int(home_sum[b]),
                pareto_partner_table=int(away_sum[b]),
                combined_pareto=int(home_sum[b] + away_sum[b]),
                meeting_delta=cast(delta[b]),
            )
            for b in np.nonzero(mask)[0]
        ]

    def apply_swap(self, a: int, b: int) -> None:
        t_a, t_b = int(self.table_of[a]), int(self.table_of[b])
        self.table_of[a], self.table_of[b] = t_b, t_a
        for d, codes in enumerate(self.codes):
            v_a, v_b = int(codes[a]), int(codes[b])
            if v_a != v_b:
                counts = self.table_counts[d]
                counts[t_a, v_a] -= 1
                counts[t_a, v_b] += 1
                counts[t_b, v_b] -= 1
                counts[t_b, v_a] += 1
            self._refresh_terms(d, t_a)
            self._refresh_terms(d, t_b)
        self.mass[:, t_a] += self.meetings[:, b] - self.meetings[:, a]
        self.mass[:, t_b] += self.meetings[:, a] - self.meetings[:, b]

    def run_sweep(
        self,
        rng: np.random.Generator,
        pareto_mix: float,
        *,
        on_swap: Optional[SwapObserver] = None,
        round_index: int = 0,
        sweep_index: int = 0,
    ) -> None:
        for a in range(self.n):
            if self.is_manual[a]:
                continue
            candidates = filter_dominated(self.candidates(a))
            chosen = select_swap(candidates, pareto_mix, rng)
            if chosen is None:
                continue
            b = self.index[chosen.partner]
            before = self.allocation() if on_swap is not None else None
            t_a, t_b = int(self.table_of[a]), int(self.table_of[b])
            self.apply_swap(a, b)
            if on_swap is not None:
                on_swap(SwapEvent(
                    round_index=round_index,
                    sweep_index=sweep_index,
                    agent=self.ids[a],
                    partner=chosen.partner,
                    agent_table=t_a,
                    partner_table=t_b,
                    before=before,
                    after=self.allocation(),
                ))


def candidates_for(
    agent_id: str,
    round_alloc: Mapping[str, int],
    panel: Panel,
    layout: TableLayout,
    ledger: MeetingLedger,
    *,
    round_index: int = 0,
    meeting_weighting: str = "counts",
    saturation_base: float = 0.5,
) -> list[SwapCandidate]:
    """All feasible swap partners for ``agent_id`` in panel order.

    A partner is feasible when neither participant is pinned (in this
    round), no demographic's balance worsens on either affected table,
    and no cluster participant would land on a non-cluster table.
    """
    if agent_id in panel.manual_for_round(round_index):
        raise ValueError(f"participant {agent_id!r} is pinned and never swaps")
    engine = _RoundEngine(
        panel, layout, ledger, round_alloc,
        round_index=round_index,
        meeting_weighting=meeting_weighting,
        saturation_base=saturation_base,
    )
    return engine.candidates(engine.index[agent_id])


def filter_dominated(candidates: list[SwapCandidate]) -> list[SwapCandidate]:
    """Drop candidates beaten or equalled on both scores (with one strict
    inequality) by another candidate; exact ties are all retained."""
    n = len(candidates)
    if n <= 1:
        return list(candidates)
    order = sorted(
        range(n),
        key=lambda k: (-candidates[k].combined_pareto, -candidates[k].meeting_delta),
    )
    keep = [False] * n
    best_delta_above = None
    i = 0
    while i < n:
        pareto = candidates[order[i]].combined_pareto
        group_best = candidates[order[i]].meeting_delta
        j = i
        while j < n and candidates[order[j]].combined_pareto == pareto:
            j += 1
        for k in order[i:j]:
            delta = candidates[k].meeting_delta
            dominated = (
                best_delta_above is not None and best_delta_above >= delta
            ) or delta < group_best
            keep[k] = not dominated
        best_delta_above = (
            group_best if best_delta_above is None else max(best_delta_above, group_best)
        )
        i = j
    return [c for k, c in enumerate(candidates) if keep[k]]


def select_swap(
    candidates: list[SwapCandidate], pareto_mix: float, rng: np.random.Generator
) -> Optional[SwapCandidate]:
    """Pick at most one candidate: with probability ``pareto_mix`` sample
    proportionally to the combined Pareto score, otherwise proportionally
    to non-negative meeting improvements. An all-zero branch falls back
    to the other; two all-zero branches select nothing."""
    if not candidates:
        return None
    pareto_weights = np.array([c.combined_pareto for c in candidates], dtype=np.float64)
    meeting_weights = np.array(
        [max(0, c.meeting_delta) for c in candidates], dtype=np.float64
    )
    if rng.random() < pareto_mix:
        branches = (pareto_weights, meeting_weights)
    else:
        branches = (meeting_weights, pareto_weights)
    for weights in branches:
        total = weights.sum()
        if total > 0:
            k = rng.choice(len(candidates), p=weights / total)
            return candidates[int(k)]
    return None


def sweep(
    round_alloc: Mapping[str, int],
    panel: Panel,
    layout: TableLayout,
    ledger: MeetingLedger,
    config: RunConfig,
    rng: np.random.Generator,
    *,
    on_swap: Optional[SwapObserver] = None,
    round_index: int = 0,
    sweep_index: int = 0,
) -> dict[str, int]:
    """One full pass over all participants in panel order, applying each
    selected swap immediately so later visits see the updated seating."""
    engine = _RoundEngine(
        panel, layout, ledger, round_alloc,
        round_index=round_index,
        meeting_weighting=config.meeting_weighting,
        saturation_base=config.saturation_base,
    )
    engine.run_sweep(
        rng, config.pareto_mix,
        on_swap=on_swap, round_index=round_index, sweep_index=sweep_index,
    )
    return engine.allocation()


def _place_randomly(
    panel: Panel,
    layout: TableLayout,
    rng: np.random.Generator,
    pins: Optional[Mapping[str, int]] = None,
) -> dict[str, int]:
    """Seat pinned participants, then cluster participants over cluster
    tables, then everyone else over all remaining seats, at random."""
    if pins is None:
        pins = panel.manual_for_round(0)
    open_seats = list(layout.sizes)
    alloc: dict[str, int] = {}
    for pid, t in pins.items():
        if open_seats[t] <= 0:
            raise InfeasibleError(f"table {t + 1} cannot seat pinned participant {pid!r}")
        open_seats[t] -= 1
        alloc[pid] = t

    def fill(pool: list[str], seat_tables: list[int]) -> None:
        if len(pool) > len(seat_tables):
            raise InfeasibleError(
                f"{len(pool)} participants for {len(seat_tables)} remaining seats"
            )
        order = rng.permutation(len(pool))
        for k, pos in enumerate(order):
            t = seat_tables[k]
            alloc[pool[pos]] = t
            open_seats[t] -= 1

    cluster_pool = [p.id for p in panel.participants if p.is_cluster and p.id not in pins]
    cluster_seats = [
        t for t in sorted(layout.cluster_tables) for _ in range(open_seats[t])
    ]
    fill(cluster_pool, cluster_seats)

    rest_pool = [p.id for p in panel.participants if not p.is_cluster and p.id not in pins]
    rest_seats = [t for t in range(layout.num_tables) for _ in range(open_seats[t])]
    fill(rest_pool, rest_seats)
    return alloc


def allocate_round(
    round_index: int,
    panel: Panel,
    layout: TableLayout,
    ledger: MeetingLedger,
    config: RunConfig,
    rng: np.random.Generator,
    *,
    on_swap: Optional[SwapObserver] = None,
) -> dict[str, int]:
    """Build one round: random constrained placement followed by
    ``config.swap_rounds`` full swap sweeps."""
    round_alloc = _place_randomly(panel, layout, rng, panel.manual_for_round(round_index))
    for s in range(config.swap_rounds):
        round_alloc = sweep(
            round_alloc, panel, layout, ledger, config, rng,
            on_swap=on_swap, round_index=round_index, sweep_index=s,
        )
    return round_alloc


def run(
    panel: Panel, config: RunConfig, *, on_swap: Optional[SwapObserver] = None
) -> tuple[AllocationPlan, MeetingLedger]:
    """Produce the full multi-round plan and its meeting ledger.

    Deterministic: the same panel and config (including rng_seed) always
    yield the identical plan.
    """
    errors = [i for i in validate_panel(panel) if i.is_error]
    if errors:
        raise InfeasibleError(f"panel is not well formed: {errors[0].message}")
    layout = validate_config(panel, config)
    rng = np.random.default_rng(config.rng_seed)
    ledger = MeetingLedger(panel.ids)
    rounds = []
    for k in range(config.num_rounds):
        round_alloc = allocate_round(
            k, panel, layout, ledger, config, rng, on_swap=on_swap
        )
        rounds.append(round_alloc)
        ledger.add_round(round_alloc)
    return AllocationPlan(rounds=tuple(rounds)), ledger


def random_plan(
    panel: Panel,
    layout: TableLayout,
    config: RunConfig,
    rng: np.random.Generator,
) -> tuple[AllocationPlan, MeetingLedger]:
    """Constraint-respecting uniformly random plan with no swap sweeps;
    the comparison baseline."""
    ledger = MeetingLedger(panel.ids)
    rounds = []
    for k in range(config.num_rounds):
        round_alloc = _place_randomly(panel, layout, rng, panel.manual_for_round(k))
        rounds.append(round_alloc)
        ledger.add_round(round_alloc)
    return AllocationPlan(rounds=tuple(rounds)), ledger
