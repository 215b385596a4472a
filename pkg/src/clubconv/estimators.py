"""scikit-learn style wrappers.

Inputs follow the estimator convention: ``X`` has one row per unit (sample)
and one column per period (feature), ordered in time.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .clubs import ClusterConfig, cluster_all, merge_clubs
from .logt import LogTConfig, compute_transition_paths, logt_regression
from .panel import DEFAULT_EPSILON, Scale, build_panel, screen_degenerate_periods


def _logt_config(est):
    return LogTConfig(
        trim_fraction=est.trim,
        trim_convention=est.trim_convention,
        hac_lag=est.hac_lag,
        critical=est.critical,
    )


class LogIndexTransformer(TransformerMixin, BaseEstimator):
    """Rebase, log and screen a raw index panel.

    Parameters
    ----------
    base_index : int or None, default=None
        Column at which every row is rescaled to 100. ``None`` keeps the
        data as given.
    epsilon : float, default=1e-12
        Leading columns whose cross-sectional log variance falls below this
        are dropped during ``fit``.

    Attributes
    ----------
    n_dropped_ : int
        Number of leading columns removed by ``transform``.
    """

    def __init__(self, base_index=None, epsilon=DEFAULT_EPSILON):
        self.base_index = base_index
        self.epsilon = epsilon

    def _log(self, X):
        X = check_array(X, dtype=np.float64)
        if np.any(X <= 0):
            raise ValueError("index values must be strictly positive")
        if self.base_index is not None:
            X = X / X[:, [self.base_index]] * 100.0
            X[:, self.base_index] = 100.0
        return np.log(X)

    def fit(self, X, y=None):
        Y = self._log(X)
        panel = build_panel(range(Y.shape[0]), range(Y.shape[1]), Y, scale=Scale.LOG)
        _, report = screen_degenerate_periods(panel, self.epsilon)
        self.n_dropped_ = len(report)
        self.n_features_in_ = Y.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_dropped_")
        Y = self._log(X)
        if Y.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {Y.shape[1]}")
        return Y[:, self.n_dropped_ :]


class LogTTest(BaseEstimator):
    """Log-t convergence test of a whole panel.

    ``fit`` takes log-scale data. After fitting, ``result_`` holds the
    regression output and ``converged_`` whether the null of convergence
    survives.
    """

    def __init__(self, trim=0.3, trim_convention="floor_rT_plus_1", hac_lag="auto", critical=-1.65):
        self.trim = trim
        self.trim_convention = trim_convention
        self.hac_lag = hac_lag
        self.critical = critical

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2, ensure_min_features=2)
        self.n_features_in_ = X.shape[1]
        self.paths_ = compute_transition_paths(X)
        self.result_ = logt_regression(self.paths_, _logt_config(self))
        self.converged_ = not self.result_.rejected
        return self

    def score(self, X=None, y=None):
        """The one-sided t statistic of the fitted slope."""
        check_is_fitted(self, "result_")
        return self.result_.t_stat


class ClubConvergence(ClusterMixin, BaseEstimator):
    """Convergence-club clustering of a log-scale panel.

    Parameters
    ----------
    ordering : {"mean_last_half", "last_observation"}
    c_star : float, default=0.0
        Sieve admission threshold.
    merge : bool, default=True
        Merge adjacent clubs whose union passes the test.
    trim, trim_convention, hac_lag, critical
        Passed to the log-t regression.

    Attributes
    ----------
    labels_ : ndarray of shape (n_units,)
        0-based club rank (0 = highest final level); ``-1`` marks divergent units.
    partition_ : ClubPartition
        Final clubs (after merging when enabled).
    initial_partition_ : ClubPartition
        Clubs before merging.
    merge_tests_ : list of MergeTest
    """

    def __init__(
        self,
        ordering="mean_last_half",
        c_star=0.0,
        merge=True,
        trim=0.3,
        trim_convention="floor_rT_plus_1",
        hac_lag="auto",
        critical=-1.65,
    ):
        self.ordering = ordering
        self.c_star = c_star
        self.merge = merge
        self.trim = trim
        self.trim_convention = trim_convention
        self.hac_lag = hac_lag
        self.critical = critical

    def fit(self, X, y=None, unit_ids=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2, ensure_min_features=5)
        if unit_ids is None:
            unit_ids = [str(i) for i in range(X.shape[0])]
        panel = build_panel(unit_ids, range(X.shape[1]), X, scale=Scale.LOG)
        config = ClusterConfig(ordering=self.ordering, c_star=self.c_star, logt=_logt_config(self))
        self.n_features_in_ = X.shape[1]
        self.unit_ids_ = list(panel.unit_ids)
        self.initial_partition_ = cluster_all(panel, config)
        if self.merge:
            self.partition_, self.merge_tests_ = merge_clubs(self.initial_partition_, panel, config)
        else:
            self.partition_, self.merge_tests_ = self.initial_partition_, []
        self.labels_ = self.partition_.labels(panel.unit_ids)
        self.n_clubs_ = len(self.partition_.clubs)
        return self
