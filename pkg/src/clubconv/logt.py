"""Relative transition paths and the log-t convergence regression."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import (
    ConstantRegressor,
    DimensionMismatch,
    LagTooLarge,
    WindowTooShort,
    ZeroCrossSectionMean,
    ZeroVariancePeriod,
)

CRITICAL_VALUE = -1.65
ZERO_MEAN_TOL = 1e-12


class TrimConvention(str, Enum):
    FLOOR_RT = "floor_rT"
    FLOOR_RT_PLUS_1 = "floor_rT_plus_1"


class Classification(str, Enum):
    ABSOLUTE = "absolute_convergence"
    CONDITIONAL = "conditional_convergence"
    NEGATIVE_B = "convergence_not_rejected_negative_b"
    REJECT = "reject_convergence"


@dataclass(frozen=True)
class LogTConfig:
    """Settings of the log-t regression.

    ``hac_lag`` is ``"auto"`` for the Newey-West rule
    ``floor(4 * (n / 100) ** (2 / 9))`` or a fixed non-negative integer.
    """

    trim_fraction: float = 0.3
    trim_convention: TrimConvention = TrimConvention.FLOOR_RT_PLUS_1
    hac_lag: object = "auto"
    critical: float = CRITICAL_VALUE

    def __post_init__(self):
        if not 0 < self.trim_fraction <= 0.5:
            raise ValueError(f"trim_fraction must lie in (0, 0.5], got {self.trim_fraction}")
        object.__setattr__(self, "trim_convention", TrimConvention(self.trim_convention))
        if self.hac_lag != "auto":
            lag = int(self.hac_lag)
            if lag < 0 or lag != self.hac_lag:
                raise ValueError(f"hac_lag must be 'auto' or a non-negative integer, got {self.hac_lag!r}")
            object.__setattr__(self, "hac_lag", lag)


@dataclass(frozen=True, eq=False)
class TransitionPaths:
    h: np.ndarray
    H: np.ndarray


@dataclass(frozen=True)
class LogTResult:
    a_hat: float
    b_hat: float
    alpha_hat: float
    t_stat: float
    hac_se: float
    window: tuple
    residuals: tuple
    classification: Classification
    n_units: int = 0
    lag: int = 0

    @property
    def rejected(self):
        return self.classification is Classification.REJECT


def _column_mean(a):
    # Sorted columns make the sum independent of row order; offsetting by the
    # column minimum keeps identical rows exact.
    s = np.sort(a, axis=0)
    return s[0] + (s - s[0]).sum(axis=0) / a.shape[0]


def compute_transition_paths(values):
    """Relative transition parameters ``h`` and their cross-sectional variance ``H``.

    ``values`` is an N x T array of log-scale observations (or a log Panel).
    """
    y = np.asarray(getattr(values, "values", values), dtype=np.float64)
    if y.ndim != 2 or y.shape[0] < 2:
        raise DimensionMismatch(f"need an N x T array with N >= 2, got shape {y.shape}")
    mean = _column_mean(y)
    bad = np.flatnonzero(np.abs(mean) < ZERO_MEAN_TOL)
    if bad.size:
        raise ZeroCrossSectionMean(f"cross-sectional mean is zero at period index {bad[0]}")
    h = y / mean
    H = _column_mean((h - 1.0) ** 2)
    return TransitionPaths(h, H)


def trim_start(n_periods, trim_fraction=0.3, convention=TrimConvention.FLOOR_RT_PLUS_1):
    """First ordinal time index (1-based) of the regression window."""
    k = math.floor(trim_fraction * n_periods + 1e-9)
    if TrimConvention(convention) is TrimConvention.FLOOR_RT_PLUS_1:
        k += 1
    # log(log(1)) is undefined
    return max(k, 2)


def ols_fit(x, y):
    """Least-squares line ``y = a + b x``. Returns ``(a, b, residuals)``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise DimensionMismatch("x and y must be 1-d of equal length >= 2")
    xc = x - x.mean()
    sxx = xc @ xc
    if sxx <= 0.0:
        raise ConstantRegressor("regressor has no variation")
    b = (xc @ (y - y.mean())) / sxx
    a = y.mean() - b * x.mean()
    return a, b, y - a - b * x


def newey_west_lag(n):
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def hac_variance(residuals, x, lag="auto"):
    """Bartlett-kernel HAC standard error of the OLS slope.

    Sandwich ``(X'X)^-1 S (X'X)^-1`` with ``X = [1, x]`` and
    ``S = sum_j w_j sum_t e_t e_{t-j} (x_t x_{t-j}' + x_{t-j} x_t')``,
    ``w_j = 1 - j / (lag + 1)`` (``j = 0`` counted once). No small-sample
    correction is applied, so ``lag=0`` is the HC0 estimator.
    """
    e = np.asarray(residuals, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    n = e.size
    if isinstance(lag, LogTConfig):
        lag = lag.hac_lag
    L = newey_west_lag(n) if lag == "auto" else int(lag)
    if L >= n:
        raise LagTooLarge(f"lag {L} must be smaller than the window length {n}")
    X = np.column_stack([np.ones(n), x])
    u = X * e[:, None]
    S = u.T @ u
    for j in range(1, L + 1):
        G = u[j:].T @ u[:-j]
        S += (1.0 - j / (L + 1.0)) * (G + G.T)
    bread = np.linalg.inv(X.T @ X)
    V = bread @ S @ bread
    return math.sqrt(max(V[1, 1], 0.0))


def classify(b_hat, t_stat, critical=CRITICAL_VALUE):
    if not t_stat >= critical:
        return Classification.REJECT
    if b_hat >= 2.0:
        return Classification.ABSOLUTE
    if b_hat >= 0.0:
        return Classification.CONDITIONAL
    return Classification.NEGATIVE_B


def logt_regression(paths, config=None, period_labels=None):
    """Regress ``log(H_1/H_t) - 2 log(log t)`` on ``log t`` over the trimmed window."""
    config = config or LogTConfig()
    H = np.asarray(paths.H, dtype=np.float64)
    T = H.size
    start = trim_start(T, config.trim_fraction, config.trim_convention)
    n = T - start + 1
    if n < 2:
        raise WindowTooShort(f"regression window has {n} points (T={T}, start={start})")
    if H[0] <= 0.0:
        raise ZeroVariancePeriod("cross-sectional variance is zero in the first period")
    t = np.arange(start, T + 1, dtype=np.float64)
    Hw = H[start - 1 :]
    if np.any(Hw <= 0.0):
        k = int(np.flatnonzero(Hw <= 0.0)[0]) + start
        raise ZeroVariancePeriod(f"cross-sectional variance is zero at t={k}")
    logt = np.log(t)
    y = np.log(H[0] / Hw) - 2.0 * np.log(logt)
    a, b, resid = ols_fit(logt, y)
    lag = newey_west_lag(n) if config.hac_lag == "auto" else config.hac_lag
    se = hac_variance(resid, logt, lag)
    if se > 0.0:
        tstat = b / se
    else:
        tstat = math.copysign(math.inf, b) if b != 0.0 else 0.0
    if period_labels is not None:
        window = (period_labels[start - 1], period_labels[T - 1])
    else:
        window = (start, T)
    return LogTResult(
        a_hat=float(a),
        b_hat=float(b),
        alpha_hat=float(b) / 2.0,
        t_stat=float(tstat),
        hac_se=float(se),
        window=window,
        residuals=tuple(float(r) for r in resid),
        classification=classify(b, tstat, config.critical),
        n_units=int(paths.h.shape[0]),
        lag=int(lag),
    )


def logt_test(panel, config=None):
    """Log-t regression on a log-scale panel (or N x T array)."""
    labels = getattr(panel, "period_labels", None)
    return logt_regression(compute_transition_paths(panel), config, labels)
