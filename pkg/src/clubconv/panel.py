"""Panel container plus the preprocessing steps applied before a log-t test."""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .exceptions import (
    AllPeriodsDegenerate,
    AlreadyLog,
    DimensionMismatch,
    DuplicateUnit,
    InputError,
    NonPositiveValue,
    UnknownPeriod,
    UnknownUnit,
)

DEFAULT_EPSILON = 1e-12
MIN_UNITS = 2
MIN_PERIODS = 5


class Scale(str, Enum):
    RAW_INDEX = "raw_index"
    LOG = "log"


class DropReason(str, Enum):
    BASE_PERIOD_DEGENERATE = "base_period_degenerate"
    VARIANCE_BELOW_EPSILON = "variance_below_epsilon"


@dataclass(frozen=True, eq=False)
class Panel:
    """Immutable unit x period matrix.

    ``values[i, t]`` belongs to ``unit_ids[i]`` at ``period_labels[t]``.
    Build instances through :func:`build_panel`, which validates.
    """

    unit_ids: tuple
    period_labels: tuple
    values: np.ndarray
    scale: Scale = Scale.RAW_INDEX
    base_period: object = None

    @property
    def n_units(self):
        return len(self.unit_ids)

    @property
    def n_periods(self):
        return len(self.period_labels)

    def unit_index(self, unit):
        try:
            return self.unit_ids.index(unit)
        except ValueError:
            raise UnknownUnit(f"unit {unit!r} not in panel") from None

    def period_index(self, period):
        for j, label in enumerate(self.period_labels):
            if label == period or str(label) == str(period):
                return j
        raise UnknownPeriod(f"period {period!r} not in panel")

    def subset(self, units):
        """Sub-panel restricted to ``units`` (in the given order)."""
        rows = [self.unit_index(u) for u in units]
        return replace(self, unit_ids=tuple(units), values=_freeze(self.values[rows]))

    def slice_periods(self, start=None, end=None):
        """Sub-panel over the closed period window ``[start, end]``."""
        j0 = 0 if start is None else self.period_index(start)
        j1 = self.n_periods - 1 if end is None else self.period_index(end)
        if j1 < j0:
            raise InputError(f"empty window {start!r}..{end!r}")
        base = self.base_period
        if base is not None and base not in self.period_labels[j0 : j1 + 1]:
            base = None
        return replace(
            self,
            period_labels=self.period_labels[j0 : j1 + 1],
            values=_freeze(self.values[:, j0 : j1 + 1]),
            base_period=base,
        )


@dataclass(frozen=True)
class PanelScreenReport:
    dropped_periods: tuple = ()
    reasons: tuple = field(default=())

    def __len__(self):
        return len(self.dropped_periods)


def _freeze(values):
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.flags.writeable = False
    return arr


def _check_increasing(periods):
    for prev, cur in zip(periods, periods[1:]):
        try:
            ok = cur > prev
        except TypeError:
            ok = str(cur) > str(prev)
        if not ok:
            raise InputError(f"period labels not strictly increasing at {prev!r} -> {cur!r}")


def build_panel(units, periods, values, scale=Scale.RAW_INDEX, base_period=None):
    """Validate and wrap a value matrix as a :class:`Panel`.

    Raw-index panels must be strictly positive. Size limits needed by the
    log-t regression are checked later by :func:`check_analysable`.
    """
    units = tuple(units)
    periods = tuple(periods)
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape != (len(units), len(periods)):
        raise DimensionMismatch(
            f"values shape {arr.shape} does not match {len(units)} units x {len(periods)} periods"
        )
    if not units or not periods:
        raise DimensionMismatch("panel needs at least one unit and one period")
    if len(set(units)) != len(units):
        seen = set()
        dup = next(u for u in units if u in seen or seen.add(u))
        raise DuplicateUnit(f"duplicate unit {dup!r}")
    _check_increasing(periods)
    if not np.all(np.isfinite(arr)):
        i, t = np.argwhere(~np.isfinite(arr))[0]
        raise InputError(f"non-finite value for unit {units[i]!r} at period {periods[t]!r}")
    scale = Scale(scale)
    if scale is Scale.RAW_INDEX and np.any(arr <= 0):
        i, t = np.argwhere(arr <= 0)[0]
        raise NonPositiveValue(
            f"value {arr[i, t]!r} for unit {units[i]!r} at period {periods[t]!r} is not positive"
        )
    return Panel(units, periods, _freeze(arr), scale, base_period)


def check_analysable(panel):
    if panel.n_units < MIN_UNITS:
        raise DimensionMismatch(f"need at least {MIN_UNITS} units, got {panel.n_units}")
    if panel.n_periods < MIN_PERIODS:
        raise DimensionMismatch(f"need at least {MIN_PERIODS} periods, got {panel.n_periods}")


def rebase(panel, base_period):
    """Rescale every unit so that its value at ``base_period`` equals 100."""
    if panel.scale is not Scale.RAW_INDEX:
        raise AlreadyLog("rebase expects a raw_index panel")
    j = panel.period_index(base_period)
    base = panel.values[:, j : j + 1]
    out = panel.values / base * 100.0
    # exact at the base column regardless of rounding
    out[:, j] = 100.0
    return replace(panel, values=_freeze(out), base_period=panel.period_labels[j])


def to_log(panel):
    if panel.scale is Scale.LOG:
        raise AlreadyLog("panel is already on the log scale")
    return replace(panel, values=_freeze(np.log(panel.values)), scale=Scale.LOG)


def screen_degenerate_periods(panel, epsilon=DEFAULT_EPSILON):
    """Drop leading periods whose cross-sectional variance is below ``epsilon``.

    Only a prefix is removed. A low-variance period after the first retained
    one is left alone.
    """
    var = np.var(panel.values, axis=0)
    keep = np.flatnonzero(var >= epsilon)
    if keep.size == 0:
        raise AllPeriodsDegenerate(
            f"cross-sectional variance below {epsilon:g} in all {panel.n_periods} periods"
        )
    first = int(keep[0])
    dropped = panel.period_labels[:first]
    reasons = tuple(
        DropReason.BASE_PERIOD_DEGENERATE
        if panel.base_period is not None and p == panel.base_period
        else DropReason.VARIANCE_BELOW_EPSILON
        for p in dropped
    )
    if first == 0:
        return panel, PanelScreenReport()
    out = replace(
        panel,
        period_labels=panel.period_labels[first:],
        values=_freeze(panel.values[:, first:]),
    )
    return out, PanelScreenReport(dropped, reasons)


def hp_smooth(panel, lamb=400.0):
    """Hodrick-Prescott trend of every unit's series (cycle discarded)."""
    from statsmodels.tsa.filters.hp_filter import hpfilter

    trend = np.vstack([hpfilter(row, lamb=lamb)[1] for row in panel.values])
    return replace(panel, values=_freeze(trend))
