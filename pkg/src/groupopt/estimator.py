"""Estimator-style front door so the allocator composes with the usual
fit/predict ecosystem (pipelines, cloning, grid search over its knobs)."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import allocator, evaluation
from .model import (
    Demographic,
    Panel,
    Participant,
    RunConfig,
    default_table_count,
    validate_config,
    validate_panel,
)


class GroupOptAllocator(BaseEstimator):
    """Assigns each row of X to a discussion table in every round.

    X is a DataFrame (or 2D array) of categorical cells, one row per
    participant. Fitting runs the full multi-round allocation;
    ``labels_`` holds the 0-based table index per participant per round,
    shaped (n_participants, n_rounds), like a clusterer with one label
    vector per round.

    Parameters
    ----------
    n_tables : int or None
        Number of tables; None picks the count whose table size is
        closest to ten.
    n_cluster_tables : int
        Tables reserved as the only places cluster participants may sit.
    n_rounds : int
        Discussion rounds to allocate.
    swap_rounds : int
        Full swap sweeps applied to each round after random placement.
    pareto_mix : float
        Probability that a swap is drawn by balance improvement rather
        than by repeat-meeting reduction.
    saturation_base : float
        Base of the diminishing per-meeting utility used in ``score``.
    demographic_columns : sequence of str or None
        Columns to balance; None balances every column not designated
        as cluster or manual.
    cluster_column, cluster_value : str or None
        Rows whose cluster_column equals cluster_value may only sit on
        cluster tables. The cluster column is a constraint, not a
        balance target.
    manual_column : str or None
        Column of fixed 0-based table indices (blank/NaN = free).
    random_state : int
        Seed; identical inputs and seed give identical labels.
    """

    def __init__(
        self,
        n_tables: Optional[int] = None,
        n_cluster_tables: int = 0,
        n_rounds: int = 1,
        swap_rounds: int = 5,
        pareto_mix: float = 0.5,
        saturation_base: float = 0.5,
        demographic_columns: Optional[Sequence[str]] = None,
        cluster_column: Optional[str] = None,
        cluster_value: Optional[str] = None,
        manual_column: Optional[str] = None,
        random_state: int = 0,
    ):
        self.n_tables = n_tables
        self.n_cluster_tables = n_cluster_tables
        self.n_rounds = n_rounds
        self.swap_rounds = swap_rounds
        self.pareto_mix = pareto_mix
        self.saturation_base = saturation_base
        self.demographic_columns = demographic_columns
        self.cluster_column = cluster_column
        self.cluster_value = cluster_value
        self.manual_column = manual_column
        self.random_state = random_state

    def _as_frame(self, X) -> pd.DataFrame:
        if isinstance(X, pd.DataFrame):
            return X
        arr = np.asarray(X)
        if arr.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {arr.shape}")
        return pd.DataFrame(arr, columns=[f"d{k + 1}" for k in range(arr.shape[1])])

    def _build_panel(self, X) -> Panel:
        df = self._as_frame(X)
        ids = [str(i) for i in df.index]
        if len(set(ids)) != len(ids):
            raise ValueError("X index values must be unique; they become participant ids")

        special = set()
        for name in (self.cluster_column, self.manual_column):
            if name is not None:
                if name not in df.columns:
                    raise ValueError(f"X has no column {name!r}")
                special.add(name)
        if (self.cluster_column is None) != (self.cluster_value is None):
            raise ValueError("cluster_column and cluster_value must be set together")
        if self.demographic_columns is None:
            demo_names = [c for c in df.columns if c not in special]
        else:
            demo_names = list(self.demographic_columns)
            for name in demo_names:
                if name not in df.columns:
                    raise ValueError(f"X has no demographic column {name!r}")

        def cell(row, name) -> str:
            value = row[name]
            return "" if pd.isna(value) else str(value)

        observed: dict[str, list[str]] = {name: [] for name in demo_names}
        participants = []
        for pid, (_, row) in zip(ids, df.iterrows()):
            values = {name: cell(row, name) for name in demo_names}
            for name, value in values.items():
                if value and value not in observed[name]:
                    observed[name].append(value)
            if self.cluster_column is not None and self.cluster_column not in values:
                values[self.cluster_column] = cell(row, self.cluster_column)
            manual = None
            if self.manual_column is not None and not pd.isna(row[self.manual_column]):
                manual = int(row[self.manual_column])
            participants.append(
                Participant(id=pid, demographics=values, manual_table=manual)
            )

        cluster = None
        if self.cluster_column is not None:
            cluster = (self.cluster_column, str(self.cluster_value))
        return Panel(
            participants=tuple(participants),
            demographics=tuple(
                Demographic(name, tuple(observed[name])) for name in demo_names
            ),
            cluster_demographic=cluster,
        )

    def fit(self, X, y=None) -> "GroupOptAllocator":
        """Run the allocation; afterwards labels_ / plan_ / report_ are set."""
        panel = self._build_panel(X)
        num_tables = self.n_tables or default_table_count(panel.size)
        issues = validate_panel(panel, num_tables)
        errors = [i for i in issues if i.is_error]
        if errors:
            raise ValueError(f"panel is not well formed: {errors[0].message}")
        config = RunConfig(
            num_tables=num_tables,
            num_cluster_tables=self.n_cluster_tables,
            num_rounds=self.n_rounds,
            swap_rounds=self.swap_rounds,
            pareto_mix=self.pareto_mix,
            saturation_base=self.saturation_base,
            rng_seed=self.random_state,
        )
        layout = validate_config(panel, config)
        plan, ledger = allocator.run(panel, config)

        self.panel_ = panel
        self.config_ = config
        self.layout_ = layout
        self.plan_ = plan
        self.ledger_ = ledger
        self.validation_issues_ = issues
        self.labels_ = np.array(
            [[round_alloc[pid] for round_alloc in plan.rounds] for pid in panel.ids],
            dtype=np.int64,
        )
        self.report_ = evaluation.build_report(plan, panel, layout, config)
        return self

    def fit_predict(self, X, y=None) -> np.ndarray:
        """Fit and return the (n_participants, n_rounds) table labels."""
        return self.fit(X).labels_

    def score(self, X=None, y=None) -> float:
        """Saturating meeting score of the fitted plan (higher is better)."""
        self._check_fitted()
        return self.report_.geometric_score

    def _check_fitted(self) -> None:
        if not hasattr(self, "plan_"):
            raise NotFittedError(
                "This GroupOptAllocator instance is not fitted yet; call fit first."
            )
