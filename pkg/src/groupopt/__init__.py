"""Multi-round discussion-table allocation for deliberative panels.

Seats participants at tables over several rounds so that each table
mirrors the panel's demographics and as many distinct pairs as possible
meet, honouring clustering and pinned-seat constraints.
"""

from .allocator import SwapCandidate, run
from .estimator import GroupOptAllocator
from .evaluation import (
    BalanceCheck,
    BaselineSummary,
    RunReport,
    balance_tolerance_check,
    build_report,
    random_baseline,
)
from .metrics import BoundsReport, MeetingLedger, bounds, geometric_meeting_score, mean_distance
from .model import (
    AllocationPlan,
    ClusterCapacityError,
    ConfigError,
    Demographic,
    GroupOptError,
    InfeasibleError,
    ManualConflictError,
    Panel,
    Participant,
    RunConfig,
    TableCountError,
    TableLayout,
    ValidationIssue,
    default_table_count,
    suggest_cluster_tables,
    validate_config,
    validate_panel,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationPlan",
    "BalanceCheck",
    "BaselineSummary",
    "BoundsReport",
    "ClusterCapacityError",
    "ConfigError",
    "Demographic",
    "GroupOptAllocator",
    "GroupOptError",
    "InfeasibleError",
    "ManualConflictError",
    "MeetingLedger",
    "Panel",
    "Participant",
    "RunConfig",
    "RunReport",
    "SwapCandidate",
    "TableCountError",
    "TableLayout",
    "ValidationIssue",
    "balance_tolerance_check",
    "bounds",
    "build_report",
    "default_table_count",
    "geometric_meeting_score",
    "mean_distance",
    "random_baseline",
    "run",
    "suggest_cluster_tables",
    "validate_config",
    "validate_panel",
    "__version__",
]
