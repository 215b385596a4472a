"""Log-t convergence testing and convergence-club clustering for panels."""

from .clubs import (
    Club,
    ClubPartition,
    ClusterConfig,
    MergeTest,
    OrderingRule,
    cluster_all,
    find_core_group,
    merge_clubs,
    order_units,
    sieve_members,
    tail_head_subsets,
    transition_test,
)
from .estimators import ClubConvergence, LogIndexTransformer, LogTTest
from .logt import (
    Classification,
    LogTConfig,
    LogTResult,
    TransitionPaths,
    TrimConvention,
    classify,
    compute_transition_paths,
    hac_variance,
    logt_regression,
    logt_test,
    ols_fit,
)
from .panel import (
    Panel,
    PanelScreenReport,
    Scale,
    build_panel,
    hp_smooth,
    rebase,
    screen_degenerate_periods,
    to_log,
)
from .synth import SyntheticSpec, generate_panel

__version__ = "0.1.0"
