"""Synthetic panels for benchmarks and examples.

Real panel rosters are personal data and do not ship with the package;
these generators produce panels of the same shapes (sizes, demographic
arity, clusterable column) with representative value proportions: each
column's values are dealt out in near-equal counts and shuffled.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .model import Demographic, Panel, Participant

_VALUE_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def make_panel(
    num_participants: int,
    level_counts: Sequence[int],
    *,
    column_names: Optional[Sequence[str]] = None,
    cluster_column: Optional[str] = None,
    cluster_value: str = "a",
    manual: Optional[dict[str, int]] = None,
    seed: int = 0,
) -> Panel:
    """Panel with one categorical column per entry of ``level_counts``.

    Column k gets values a, b, c, ... dealt in near-equal counts and
    shuffled with a deterministic seed. When ``cluster_column`` names one
    of the columns, holders of ``cluster_value`` become cluster
    participants and that column constrains seating instead of joining
    the diversification set. ``manual`` pins ids to 0-based tables.
    """
    if num_participants < 2:
        raise ValueError("panel needs at least two participants")
    for levels in level_counts:
        if not 2 <= levels <= len(_VALUE_ALPHABET):
            raise ValueError(f"level count {levels} out of range")
    if column_names is None:
        column_names = [f"d{k + 1}" for k in range(len(level_counts))]
    if len(column_names) != len(level_counts):
        raise ValueError("column_names must match level_counts")
    if cluster_column is not None and cluster_column not in column_names:
        raise ValueError(f"cluster column {cluster_column!r} is not a panel column")

    rng = np.random.default_rng(seed)
    columns: dict[str, list[str]] = {}
    value_sets: dict[str, tuple[str, ...]] = {}
    for name, levels in zip(column_names, level_counts):
        values = tuple(_VALUE_ALPHABET[v] for v in range(levels))
        value_sets[name] = values
        base, remainder = divmod(num_participants, levels)
        cells = []
        for v, value in enumerate(values):
            cells.extend([value] * (base + (1 if v < remainder else 0)))
        order = rng.permutation(num_participants)
        columns[name] = [cells[i] for i in order]

    manual = manual or {}
    width = len(str(num_participants))
    participants = []
    for i in range(num_participants):
        pid = f"p{i + 1:0{width}d}"
        demographics = {name: columns[name][i] for name in column_names}
        participants.append(
            Participant(id=pid, demographics=demographics, manual_table=manual.get(pid))
        )

    demographics = tuple(
        Demographic(name, value_sets[name])
        for name in column_names
        if name != cluster_column
    )
    cluster = (cluster_column, cluster_value) if cluster_column is not None else None
    return Panel(
        participants=tuple(participants),
        demographics=demographics,
        cluster_demographic=cluster,
    )


# Panel shapes matching the published experiment grid, desk-scaled: the
# 100- and 120-participant rosters are reproduced at 60 participants.
INSTANCE_SHAPES: dict[str, dict] = {
    "synth30": {"size": 30, "levels": (2, 2, 2), "clusterable": "d1"},
    "synth40": {"size": 40, "levels": (2, 2, 2, 2, 3, 4, 5), "clusterable": "d1"},
    "synth60": {"size": 60, "levels": (2, 2, 2, 2, 4), "clusterable": "d1"},
    "synth60w": {"size": 60, "levels": (2, 2, 2, 4), "clusterable": None},
    "synth120": {"size": 120, "levels": (2, 2, 2, 4), "clusterable": None},
}


def instance_panel(name: str, *, clustered: bool = False, seed: int = 0) -> Panel:
    """One of the named benchmark panels; ``clustered`` turns the shape's
    clusterable column into a clustering constraint."""
    try:
        shape = INSTANCE_SHAPES[name]
    except KeyError:
        raise ValueError(
            f"unknown instance {name!r}; choose from {', '.join(sorted(INSTANCE_SHAPES))}"
        ) from None
    cluster_column = shape["clusterable"] if clustered else None
    if clustered and cluster_column is None:
        raise ValueError(f"instance {name!r} has no clusterable column")
    return make_panel(
        shape["size"], shape["levels"], cluster_column=cluster_column, seed=seed
    )
