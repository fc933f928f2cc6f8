"""Domain types and validation for panel allocation runs."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence


class GroupOptError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(GroupOptError):
    """A run configuration is unusable for the given panel."""


class TableCountError(ConfigError):
    pass


class ClusterCapacityError(ConfigError):
    """Cluster tables cannot seat every cluster participant.

    Carries a suggestion payload so callers can tell the user how many
    cluster tables would make the run feasible.
    """

    def __init__(self, message: str, minimum: int, recommended: int):
        super().__init__(message)
        self.minimum = minimum
        self.recommended = recommended


class ManualConflictError(ConfigError):
    pass


class InfeasibleError(GroupOptError):
    """Constraints cannot be satisfied at all (corrupted input guard)."""


@dataclass(frozen=True)
class Demographic:
    """A categorical attribute to balance, with its declared value set."""

    name: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class Participant:
    id: str
    demographics: Mapping[str, str]
    is_cluster: bool = False
    manual_table: Optional[int] = None  # 0-based table index, fixed across rounds


@dataclass(frozen=True)
class Panel:
    """The roster: participants, the demographics to diversify, and the
    optional (column, value) pair that marks participants to cluster.

    ``is_cluster`` flags are derived from ``cluster_demographic`` at
    construction time, so they can never disagree with the roster data.
    ``manual_overrides`` maps participant id -> {0-based round -> 0-based
    table} for pins that vary by round; a participant's constant
    ``manual_table`` applies to every round without an override.
    """

    participants: tuple[Participant, ...]
    demographics: tuple[Demographic, ...]
    cluster_demographic: Optional[tuple[str, str]] = None
    manual_overrides: Mapping[str, Mapping[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "demographics", tuple(self.demographics))
        derived = []
        for p in self.participants:
            if self.cluster_demographic is None:
                flag = False
            else:
                name, value = self.cluster_demographic
                flag = p.demographics.get(name) == value
            derived.append(p if p.is_cluster == flag else replace(p, is_cluster=flag))
        object.__setattr__(self, "participants", tuple(derived))
        object.__setattr__(self, "_by_id", {p.id: p for p in derived})
        object.__setattr__(self, "_counts_cache", {})

    @property
    def size(self) -> int:
        return len(self.participants)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.participants)

    def participant(self, participant_id: str) -> Participant:
        return self._by_id[participant_id]

    def cluster_agents(self) -> list[Participant]:
        return [p for p in self.participants if p.is_cluster]

    def manual_agents(self) -> list[Participant]:
        return [p for p in self.participants if p.manual_table is not None]

    def manual_for_round(self, round_index: int) -> dict[str, int]:
        """Effective pins for one round: constant pins plus any per-round
        overrides (an override may also pin an otherwise free participant
        for just that round)."""
        pins = {p.id: p.manual_table for p in self.participants if p.manual_table is not None}
        for pid, per_round in self.manual_overrides.items():
            table = per_round.get(round_index)
            if table is not None:
                pins[pid] = table
        return pins

    def value_counts(self, demographic: str) -> Counter:
        cached = self._counts_cache.get(demographic)
        if cached is None:
            cached = Counter(p.demographics.get(demographic) for p in self.participants)
            self._counts_cache[demographic] = cached
        return cached

    def proportion(self, demographic: str, value: str) -> float:
        """Share of the whole panel holding ``value`` for ``demographic``."""
        return self.value_counts(demographic)[value] / self.size


@dataclass(frozen=True)
class RunConfig:
    num_tables: int
    num_rounds: int
    num_cluster_tables: int = 0
    swap_rounds: int = 5
    pareto_mix: float = 0.5
    saturation_base: float = 0.5
    rng_seed: int = 0
    # swap evaluation of prior meetings: raw pair counts, or marginal
    # utilities under the saturating score ("geometric")
    meeting_weighting: str = "counts"


@dataclass(frozen=True)
class TableLayout:
    """Seat counts per table plus which tables host cluster participants.

    Sizes differ by at most one; larger tables come first so cluster
    tables (lowest indices) get the most seats.
    """

    sizes: tuple[int, ...]
    cluster_tables: frozenset[int] = frozenset()

    @property
    def num_tables(self) -> int:
        return len(self.sizes)

    @property
    def num_seats(self) -> int:
        return sum(self.sizes)

    def cluster_seats(self) -> int:
        return sum(self.sizes[t] for t in self.cluster_tables)

    def is_cluster_table(self, table: int) -> bool:
        return table in self.cluster_tables


@dataclass(frozen=True)
class AllocationPlan:
    """Per-round mapping participant id -> table index, one entry per round."""

    rounds: tuple[Mapping[str, int], ...]

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" | "warning"
    code: str
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == "error"


# Demographics with more distinct values than this are flagged: granular
# levels held by a handful of participants cannot be spread across tables,
# and should be merged into broader groups before allocation.
MAX_RECOMMENDED_VALUES = 5


def default_table_count(num_participants: int, target_size: int = 10) -> int:
    """Table count whose seats-per-table comes closest to ``target_size``."""
    if num_participants < 1:
        raise ValueError("need at least one participant")
    return min(
        range(1, num_participants + 1),
        key=lambda j: (abs(num_participants / j - target_size), j),
    )


def table_sizes(num_participants: int, num_tables: int) -> tuple[int, ...]:
    """Split participants over tables as evenly as possible, larger first."""
    if num_tables < 1:
        raise ValueError("need at least one table")
    lower, upper_count = divmod(num_participants, num_tables)
    lower_count = num_tables - upper_count
    return tuple([lower + 1] * upper_count + [lower] * lower_count)


def validate_panel(panel: Panel, num_tables: Optional[int] = None) -> list[ValidationIssue]:
    """Check a panel for structural problems and allocation hazards.

    Returns issues as data; an empty list means the panel is well formed.
    Pass ``num_tables`` when known to also flag values held by too few
    participants to spread one per table.
    """
    issues: list[ValidationIssue] = []

    if panel.size < 2:
        issues.append(ValidationIssue(
            "error", "panel-too-small",
            f"panel has {panel.size} participant(s); at least 2 required",
        ))

    seen_ids = Counter(p.id for p in panel.participants)
    for pid, n in sorted(seen_ids.items()):
        if n > 1:
            issues.append(ValidationIssue(
                "error", "duplicate-id", f"participant id {pid!r} appears {n} times",
            ))

    names = Counter(d.name for d in panel.demographics)
    for name, n in names.items():
        if n > 1:
            issues.append(ValidationIssue(
                "error", "duplicate-demographic", f"demographic {name!r} declared {n} times",
            ))

    required = [d.name for d in panel.demographics]
    if panel.cluster_demographic is not None:
        cname = panel.cluster_demographic[0]
        if cname not in names:
            required.append(cname)

    for demo in panel.demographics:
        declared = set(demo.values)
        if len(declared) < 2:
            issues.append(ValidationIssue(
                "error", "degenerate-demographic",
                f"demographic {demo.name!r} has {len(declared)} distinct value(s); need at least 2",
            ))
        if len(declared) > MAX_RECOMMENDED_VALUES:
            issues.append(ValidationIssue(
                "warning", "too-many-values",
                f"demographic {demo.name!r} has {len(declared)} values; consider merging "
                f"granular levels into broader groups (at most {MAX_RECOMMENDED_VALUES} recommended)",
            ))
        observed = panel.value_counts(demo.name)
        for value in sorted(v for v in observed if v):
            if value not in declared:
                issues.append(ValidationIssue(
                    "error", "undeclared-value",
                    f"value {value!r} for demographic {demo.name!r} is not in its declared set",
                ))
        if num_tables is not None:
            for value in demo.values:
                count = observed.get(value, 0)
                if 0 < count < num_tables:
                    issues.append(ValidationIssue(
                        "warning", "unspreadable-value",
                        f"only {count} participant(s) hold {demo.name!r}={value!r}; "
                        f"cannot place one on each of {num_tables} tables",
                    ))

    for p in panel.participants:
        for name in required:
            value = p.demographics.get(name)
            if value is None or value == "":
                issues.append(ValidationIssue(
                    "error", "missing-value",
                    f"participant {p.id!r} has no value for demographic {name!r}",
                ))

    return issues


def suggest_cluster_tables(panel: Panel, config: RunConfig) -> tuple[int, int]:
    """(minimum, recommended) cluster-table counts for this panel.

    Minimum is the fewest largest-first tables whose seats cover every
    cluster participant; recommended adds one table of slack, capped at
    the table count, because a binding cluster constraint freezes those
    participants away from everyone else.
    """
    cluster_count = len(panel.cluster_agents())
    if cluster_count == 0:
        return (0, 0)
    sizes = table_sizes(panel.size, config.num_tables)
    seats = 0
    for minimum, size in enumerate(sizes, start=1):
        seats += size
        if seats >= cluster_count:
            recommended = min(minimum + 1, config.num_tables)
            return (minimum, recommended)
    raise InfeasibleError(
        f"{cluster_count} cluster participants cannot fit in {panel.size} seats"
    )


def validate_config(panel: Panel, config: RunConfig) -> TableLayout:
    """Check config against panel and return the table layout.

    Raises a ConfigError subtype describing the first problem found;
    ClusterCapacityError carries a suggested cluster-table count.
    """
    if config.num_tables < 1:
        raise TableCountError("number of tables must be at least 1")
    if config.num_tables > panel.size:
        raise TableCountError(
            f"{config.num_tables} tables for {panel.size} participants; "
            "every table needs at least one participant"
        )
    if config.num_cluster_tables < 0:
        raise TableCountError("number of cluster tables cannot be negative")
    if config.num_cluster_tables > config.num_tables:
        raise TableCountError(
            f"{config.num_cluster_tables} cluster tables exceed the {config.num_tables} tables available"
        )
    if config.num_rounds < 1:
        raise ConfigError("number of rounds must be at least 1")
    if config.swap_rounds < 1:
        raise ConfigError("number of swap rounds must be at least 1")
    if not 0.0 <= config.pareto_mix <= 1.0:
        raise ConfigError("pareto_mix must lie in [0, 1]")
    if not 0.0 < config.saturation_base < 1.0:
        raise ConfigError("saturation_base must lie strictly between 0 and 1")
    if config.rng_seed < 0:
        raise ConfigError("rng_seed must be a non-negative integer")
    if config.meeting_weighting not in ("counts", "geometric"):
        raise ConfigError(
            f"meeting_weighting must be 'counts' or 'geometric', "
            f"not {config.meeting_weighting!r}"
        )

    sizes = table_sizes(panel.size, config.num_tables)
    # Largest tables first in `sizes`, so the first k indices are the k
    # largest tables with ties broken by lowest index.
    cluster_tables = frozenset(range(config.num_cluster_tables))
    layout = TableLayout(sizes=sizes, cluster_tables=cluster_tables)

    known_ids = set(panel.ids)
    for pid in panel.manual_overrides:
        if pid not in known_ids:
            raise ManualConflictError(f"manual override for unknown participant {pid!r}")

    cluster_count = len(panel.cluster_agents())
    for k in range(config.num_rounds):
        pins = panel.manual_for_round(k)
        manual_per_table: Counter = Counter()
        manual_noncluster_on_cluster = 0
        for pid, t in pins.items():
            p = panel.participant(pid)
            if not 0 <= t < config.num_tables:
                raise ManualConflictError(
                    f"participant {pid!r} is pinned to table {t + 1} in round {k + 1}, "
                    f"but only tables 1..{config.num_tables} exist"
                )
            if p.is_cluster and not layout.is_cluster_table(t):
                raise ManualConflictError(
                    f"cluster participant {pid!r} is pinned to table {t + 1} "
                    f"in round {k + 1}, which is not a cluster table"
                )
            manual_per_table[t] += 1
            if manual_per_table[t] > sizes[t]:
                raise ManualConflictError(
                    f"table {t + 1} has {sizes[t]} seats but {manual_per_table[t]} "
                    f"pinned participants in round {k + 1}"
                )
            if not p.is_cluster and layout.is_cluster_table(t):
                manual_noncluster_on_cluster += 1

        available = layout.cluster_seats() - manual_noncluster_on_cluster
        if cluster_count > available:
            minimum, recommended = suggest_cluster_tables(panel, config)
            raise ClusterCapacityError(
                f"{cluster_count} cluster participants need more than the "
                f"{available} seats available on {config.num_cluster_tables} cluster table(s); "
                f"use at least {minimum} (recommended {recommended})",
                minimum=minimum,
                recommended=recommended,
            )

    return layout


def check_plan(plan: AllocationPlan, panel: Panel, layout: TableLayout) -> None:
    """Assert every plan invariant; raises ValueError naming the first violation.

    Invariants: each round partitions the panel with exact table
    occupancies, cluster participants only sit on cluster tables, and
    pinned participants sit at their pinned table in every round.
    """
    expected_ids = set(panel.ids)
    for k, round_alloc in enumerate(plan.rounds):
        if set(round_alloc) != expected_ids:
            missing = sorted(expected_ids - set(round_alloc))
            extra = sorted(set(round_alloc) - expected_ids)
            raise ValueError(
                f"round {k + 1} is not a partition of the panel "
                f"(missing {missing[:5]}, unknown {extra[:5]})"
            )
        occupancy = Counter(round_alloc.values())
        for t, size in enumerate(layout.sizes):
            if occupancy.get(t, 0) != size:
                raise ValueError(
                    f"round {k + 1}: table {t + 1} seats {occupancy.get(t, 0)} "
                    f"participants but has {size} seats"
                )
        pins = panel.manual_for_round(k)
        for p in panel.participants:
            t = round_alloc[p.id]
            if p.is_cluster and not layout.is_cluster_table(t):
                raise ValueError(
                    f"round {k + 1}: cluster participant {p.id!r} sits on "
                    f"non-cluster table {t + 1}"
                )
            pinned = pins.get(p.id)
            if pinned is not None and t != pinned:
                raise ValueError(
                    f"round {k + 1}: participant {p.id!r} is pinned to table "
                    f"{pinned + 1} but sits on table {t + 1}"
                )
