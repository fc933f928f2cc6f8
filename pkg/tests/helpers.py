"""Hand-built panels and independent oracles shared across test modules."""

from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction

from groupopt.model import Demographic, Panel, Participant


def binary_panel(
    n: int,
    split: dict[str, int] | None = None,
    *,
    demographic: str = "age",
    values: tuple[str, str] = ("young", "old"),
    cluster: tuple[str, str] | None = None,
    manual: dict[str, int] | None = None,
) -> Panel:
    """Panel of n participants with one binary demographic.

    split maps value -> count (defaults to an even split). Participant
    ids are a01, a02, ... assigned to values in order.
    """
    split = split or {values[0]: n // 2, values[1]: n - n // 2}
    assert sum(split.values()) == n
    manual = manual or {}
    cells = [v for v in values for _ in range(split.get(v, 0))]
    participants = tuple(
        Participant(
            id=f"a{i + 1:02d}",
            demographics={demographic: cells[i]},
            manual_table=manual.get(f"a{i + 1:02d}"),
        )
        for i in range(n)
    )
    return Panel(
        participants=participants,
        demographics=(Demographic(demographic, values),),
        cluster_demographic=cluster,
    )


def panel_from_rows(
    rows: list[tuple[str, dict[str, str]]],
    demographics: list[tuple[str, tuple[str, ...]]],
    *,
    cluster: tuple[str, str] | None = None,
    manual: dict[str, int] | None = None,
) -> Panel:
    manual = manual or {}
    return Panel(
        participants=tuple(
            Participant(id=pid, demographics=values, manual_table=manual.get(pid))
            for pid, values in rows
        ),
        demographics=tuple(Demographic(name, values) for name, values in demographics),
        cluster_demographic=cluster,
    )


def exact_table_distance(round_alloc, panel, table, demographic) -> Fraction:
    """Rational-arithmetic recount of the L1 balance distance."""
    demo = next(d for d in panel.demographics if d.name == demographic)
    members = [pid for pid, t in round_alloc.items() if t == table]
    counts = Counter(panel.participant(pid).demographics.get(demographic) for pid in members)
    panel_counts = Counter(p.demographics.get(demographic) for p in panel.participants)
    total = Fraction(0)
    for value in demo.values:
        total += abs(
            Fraction(counts.get(value, 0), len(members))
            - Fraction(panel_counts.get(value, 0), panel.size)
        )
    return total


def count_meetings(rounds: list[dict[str, int]]) -> Counter:
    """Pair -> number of rounds co-seated, by direct enumeration."""
    meetings: Counter = Counter()
    for round_alloc in rounds:
        tables: dict[int, list[str]] = {}
        for pid, t in round_alloc.items():
            tables.setdefault(t, []).append(pid)
        for members in tables.values():
            for a, b in itertools.combinations(sorted(members), 2):
                meetings[(a, b)] += 1
    return meetings
