"""Scalar measures used by the allocator and the evaluation reports.

Distance comparisons that feed swap decisions are computed on integer
numerators (every proportion here is a ratio of two integers), so Pareto
signs are exact and never disturbed by float rounding.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .model import AllocationPlan, Panel, TableLayout


class MeetingLedger:
    """Symmetric pair->count matrix of meetings accumulated across rounds."""

    def __init__(self, ids: Sequence[str]):
        self.ids: tuple[str, ...] = tuple(ids)
        self._index = {pid: i for i, pid in enumerate(self.ids)}
        if len(self._index) != len(self.ids):
            raise ValueError("participant ids must be unique")
        n = len(self.ids)
        self._counts = np.zeros((n, n), dtype=np.int64)

    @classmethod
    def from_plan(cls, plan: AllocationPlan, ids: Sequence[str]) -> "MeetingLedger":
        ledger = cls(ids)
        for round_alloc in plan.rounds:
            ledger.add_round(round_alloc)
        return ledger

    @property
    def size(self) -> int:
        return len(self.ids)

    def matrix(self) -> np.ndarray:
        """The raw count matrix, indexed by panel order. Do not mutate."""
        return self._counts

    def index_of(self, participant_id: str) -> int:
        return self._index[participant_id]

    def count(self, a: str, b: str) -> int:
        if a == b:
            raise ValueError("a pair consists of two distinct participants")
        return int(self._counts[self._index[a], self._index[b]])

    def add_round(self, round_alloc: Mapping[str, int]) -> None:
        tables: dict[int, list[int]] = {}
        for pid, table in round_alloc.items():
            tables.setdefault(table, []).append(self._index[pid])
        for members in tables.values():
            for a, b in itertools.combinations(members, 2):
                self._counts[a, b] += 1
                self._counts[b, a] += 1

    def total_meetings(self) -> int:
        """Sum of counts over unordered pairs (k rounds contribute k*M)."""
        return int(self._counts.sum()) // 2

    def met_pairs(self) -> int:
        iu = np.triu_indices(self.size, k=1)
        return int(np.count_nonzero(self._counts[iu]))

    def unmet_pairs(self) -> int:
        return pairs_total(self.size) - self.met_pairs()

    def count_histogram(self) -> dict[int, int]:
        """Map meeting count (>= 1) to the number of pairs with that count."""
        iu = np.triu_indices(self.size, k=1)
        values = self._counts[iu]
        values = values[values > 0]
        uniques, freqs = np.unique(values, return_counts=True)
        return {int(u): int(f) for u, f in zip(uniques, freqs)}

    def pairs_with_at_least(self, m: int) -> int:
        if m <= 0:
            return pairs_total(self.size)
        iu = np.triu_indices(self.size, k=1)
        return int(np.count_nonzero(self._counts[iu] >= m))

    def copy(self) -> "MeetingLedger":
        clone = MeetingLedger(self.ids)
        clone._counts = self._counts.copy()
        return clone


def table_members(round_alloc: Mapping[str, int], table: int) -> list[str]:
    return [pid for pid, t in round_alloc.items() if t == table]


def table_proportion(
    round_alloc: Mapping[str, int], panel: Panel, table: int, demographic: str, value: str
) -> float:
    members = table_members(round_alloc, table)
    if not members:
        raise ValueError(f"table {table} has no occupants")
    holders = sum(1 for pid in members if panel.participant(pid).demographics.get(demographic) == value)
    return holders / len(members)


def _distance_numerator(
    table_counts: Mapping[str, int],
    table_size: int,
    panel_counts: Mapping[str, int],
    panel_size: int,
    values: Sequence[str],
) -> int:
    # |c_v/n - P_v/N| summed over values, scaled by n*N to stay integral.
    return sum(
        abs(table_counts.get(v, 0) * panel_size - panel_counts.get(v, 0) * table_size)
        for v in values
    )


def table_distance(
    round_alloc: Mapping[str, int], panel: Panel, table: int, demographic: str
) -> float:
    """L1 distance between the table's value distribution and the panel's."""
    demo = next(d for d in panel.demographics if d.name == demographic)
    members = table_members(round_alloc, table)
    if not members:
        raise ValueError(f"table {table} has no occupants")
    counts = Counter(panel.participant(pid).demographics.get(demographic) for pid in members)
    numerator = _distance_numerator(
        counts, len(members), panel.value_counts(demographic), panel.size, demo.values
    )
    return numerator / (len(members) * panel.size)


def mean_distance(plan: AllocationPlan, panel: Panel) -> float:
    """Mean of table_distance over every table, demographic, and round."""
    distances = []
    for round_alloc in plan.rounds:
        tables = sorted(set(round_alloc.values()))
        for table in tables:
            for demo in panel.demographics:
                distances.append(table_distance(round_alloc, panel, table, demo.name))
    return float(np.mean(distances)) if distances else 0.0


def pareto_change(
    round_alloc: Mapping[str, int],
    panel: Panel,
    i: str,
    i_prime: str,
    table: int,
    demographic: str,
) -> int:
    """Sign of the distance improvement on ``table`` if ``i`` (seated there)
    were replaced by ``i_prime``: +1 better, 0 unchanged, -1 worse."""
    if round_alloc[i] != table:
        raise ValueError(f"{i!r} does not sit on table {table}")
    if round_alloc[i_prime] == table:
        raise ValueError(f"{i_prime!r} already sits on table {table}")
    demo = next(d for d in panel.demographics if d.name == demographic)
    value_i = panel.participant(i).demographics.get(demographic)
    value_p = panel.participant(i_prime).demographics.get(demographic)
    if value_i == value_p:
        return 0
    members = table_members(round_alloc, table)
    counts = Counter(panel.participant(pid).demographics.get(demographic) for pid in members)
    panel_counts = panel.value_counts(demographic)
    before = _distance_numerator(counts, len(members), panel_counts, panel.size, demo.values)
    counts[value_i] -= 1
    counts[value_p] += 1
    after = _distance_numerator(counts, len(members), panel_counts, panel.size, demo.values)
    return int(np.sign(before - after))


def pareto_score(
    round_alloc: Mapping[str, int], panel: Panel, i: str, i_prime: str, table: int
) -> int:
    """Per-table swap score: -1 if any demographic worsens, else the sum
    of per-demographic changes."""
    changes = [
        pareto_change(round_alloc, panel, i, i_prime, table, demo.name)
        for demo in panel.demographics
    ]
    if any(c == -1 for c in changes):
        return -1
    return sum(changes)


def table_meeting_load(round_alloc: Mapping[str, int], table: int, ledger: MeetingLedger) -> int:
    """Sum of prior meeting counts over unordered pairs seated at ``table``.

    The ledger must reflect only rounds strictly before this one.
    """
    members = table_members(round_alloc, table)
    return sum(ledger.count(a, b) for a, b in itertools.combinations(members, 2))


def swap_meeting_delta(
    round_alloc: Mapping[str, int], i: str, i_prime: str, ledger: MeetingLedger
) -> int:
    """Change in repeat-meeting load across both tables if i and i_prime
    traded seats; positive means fewer repeats after the swap."""
    t_i, t_p = round_alloc[i], round_alloc[i_prime]
    if t_i == t_p:
        raise ValueError("swap requires two distinct tables")
    others_i = [pid for pid in table_members(round_alloc, t_i) if pid != i]
    others_p = [pid for pid in table_members(round_alloc, t_p) if pid != i_prime]
    load_i = sum(ledger.count(i, x) for x in others_i)
    load_p_incoming = sum(ledger.count(i_prime, x) for x in others_i)
    load_p = sum(ledger.count(i_prime, x) for x in others_p)
    load_i_incoming = sum(ledger.count(i, x) for x in others_p)
    return (load_i - load_p_incoming) + (load_p - load_i_incoming)


def swap_geometric_delta(
    round_alloc: Mapping[str, int], i: str, i_prime: str, ledger: MeetingLedger, a: float = 0.5
) -> float:
    """Change in saturating meeting utility if i and i_prime traded seats:
    co-seating a pair met c times before is worth a**(c+1). Positive means
    the swap improves the meeting objective. The alternative swap-time
    evaluation behind RunConfig.meeting_weighting = "geometric"."""
    t_i, t_p = round_alloc[i], round_alloc[i_prime]
    if t_i == t_p:
        raise ValueError("swap requires two distinct tables")
    others_i = [pid for pid in table_members(round_alloc, t_i) if pid != i]
    others_p = [pid for pid in table_members(round_alloc, t_p) if pid != i_prime]
    gained = sum(a ** (ledger.count(i_prime, x) + 1) for x in others_i) + sum(
        a ** (ledger.count(i, y) + 1) for y in others_p
    )
    lost = sum(a ** (ledger.count(i, x) + 1) for x in others_i) + sum(
        a ** (ledger.count(i_prime, y) + 1) for y in others_p
    )
    return gained - lost


def geometric_meeting_score(ledger: MeetingLedger, a: float = 0.5) -> float:
    """Saturating meeting utility: a pair's n-th meeting is worth a**n.

    A pair met c times contributes a/(1-a) * (1 - a**c); with a = 0.5
    that is 1 - 0.5**c.
    """
    if not 0.0 < a < 1.0:
        raise ValueError("saturation base must lie strictly between 0 and 1")
    return geometric_score_from_histogram(ledger.count_histogram(), a)


def geometric_score_from_histogram(histogram: Mapping[int, int], a: float = 0.5) -> float:
    if not 0.0 < a < 1.0:
        raise ValueError("saturation base must lie strictly between 0 and 1")
    scale = a / (1.0 - a)
    return float(sum(n_pairs * scale * (1.0 - a ** count) for count, n_pairs in histogram.items()))


def pairs_total(num_participants: int) -> int:
    return num_participants * (num_participants - 1) // 2


def meetings_per_round(layout: TableLayout) -> int:
    """Number of co-seated pairs in any single round."""
    return sum(n * (n - 1) // 2 for n in layout.sizes)


def _even_spread(n: int, num_tables: int) -> list[int]:
    q, r = divmod(n, num_tables)
    return [q + 1] * r + [q] * (num_tables - r)


def even_spread_feasible(layout: TableLayout) -> bool:
    """Whether every table's members can simultaneously be spread as evenly
    as possible over next round's tables without overfilling any of them."""
    num_tables = layout.num_tables
    base_loads = sum(n // num_tables for n in layout.sizes)
    caps = [size - base_loads for size in layout.sizes]
    if min(caps) < 0:
        return False
    extras = sorted((n % num_tables for n in layout.sizes), reverse=True)
    for r in extras:
        if r == 0:
            continue
        # place this table's r extra members on the r roomiest tables
        order = sorted(range(num_tables), key=lambda t: -caps[t])[:r]
        if caps[order[-1]] < 1:
            return False
        for t in order:
            caps[t] -= 1
    return True


def _min_repeats_exhaustive(sizes: Sequence[int]) -> int:
    """Minimum repeated pairs over all re-partitions, by enumeration."""
    sizes = sorted(sizes, reverse=True)
    n = sum(sizes)
    agents = list(range(n))
    first_round: list[list[int]] = []
    cursor = 0
    for size in sizes:
        first_round.append(agents[cursor:cursor + size])
        cursor += size
    same_table = [[False] * n for _ in range(n)]
    for group in first_round:
        for a, b in itertools.combinations(group, 2):
            same_table[a][b] = True

    best = pairs_total(n)

    def recurse(remaining: tuple[int, ...], table: int, prev_min: int, repeats: int) -> None:
        nonlocal best
        if repeats >= best:
            return
        if table == len(sizes):
            best = repeats
            return
        size = sizes[table]
        # equal-size tables are interchangeable; force their minimum
        # elements to increase so each unordered partition appears once
        min_floor = prev_min if table > 0 and sizes[table] == sizes[table - 1] else -1
        for group in itertools.combinations(remaining, size):
            if group[0] <= min_floor:
                continue
            extra = sum(
                1 for a, b in itertools.combinations(group, 2) if same_table[a][b]
            )
            if repeats + extra < best:
                chosen = set(group)
                leftovers = tuple(x for x in remaining if x not in chosen)
                recurse(leftovers, table + 1, group[0], repeats + extra)

    recurse(tuple(agents), 0, -1, 0)
    return best


# Above this panel size, capacity-bound layouts fall back to the even-spread
# value (a lower bound) instead of exhaustive search.
_EXHAUSTIVE_LIMIT = 12


def min_repeats_between_rounds(layout: TableLayout) -> int:
    """Fewest repeated pair-meetings forced between two consecutive rounds.

    Spreading each table's members as evenly as possible over next
    round's tables leaves r groups of q+1 and the rest of q, where
    q, r = divmod(table size, number of tables); pairs within those
    groups repeat. When destination seats are too uneven to admit that
    spread jointly, small panels are solved exhaustively and large ones
    keep the even-spread value as a lower bound.
    """
    num_tables = layout.num_tables
    total = 0
    for size in layout.sizes:
        q, r = divmod(size, num_tables)
        total += r * (q + 1) * q // 2 + (num_tables - r) * q * (q - 1) // 2
    if not even_spread_feasible(layout) and layout.num_seats < _EXHAUSTIVE_LIMIT:
        return _min_repeats_exhaustive(layout.sizes)
    return total


@dataclass(frozen=True)
class BoundsReport:
    """Theoretical meeting limits for a layout over a whole run."""

    pairs_total: int
    meetings_per_round: int
    min_repeats: int
    min_unmet_pairs: int
    max_first_meetings: int


def bounds(layout: TableLayout, num_rounds: int) -> BoundsReport:
    """Most-optimistic meeting outcome: the first round meets M new pairs
    and each later round at most M minus the forced repeats."""
    n_pairs = pairs_total(layout.num_seats)
    per_round = meetings_per_round(layout)
    repeats = min_repeats_between_rounds(layout)
    min_unmet = max(0, n_pairs - (per_round + (num_rounds - 1) * (per_round - repeats)))
    return BoundsReport(
        pairs_total=n_pairs,
        meetings_per_round=per_round,
        min_repeats=repeats,
        min_unmet_pairs=min_unmet,
        max_first_meetings=n_pairs - min_unmet,
    )
