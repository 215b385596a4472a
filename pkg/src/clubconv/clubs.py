"""Endogenous club detection, club merging and transition probes.

Clustering follows the four steps of the log-t club procedure:

1. order units by their level over the final part of the sample;
2. find a core group among the top-ranked units;
3. sieve every other unit into the core one at a time;
4. repeat on whatever is left until no core group can be formed.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .exceptions import InputError, NumericalError, OverlappingSubsets, UnknownUnit
from .logt import LogTConfig, logt_test

MAX_SIEVE_ITER = 32


class OrderingRule(str, Enum):
    LAST_OBSERVATION = "last_observation"
    MEAN_LAST_HALF = "mean_last_half"


@dataclass(frozen=True)
class ClusterConfig:
    ordering: OrderingRule = OrderingRule.MEAN_LAST_HALF
    c_star: float = 0.0
    logt: LogTConfig = field(default_factory=LogTConfig)
    max_sieve_iter: int = MAX_SIEVE_ITER

    def __post_init__(self):
        object.__setattr__(self, "ordering", OrderingRule(self.ordering))

    @property
    def critical(self):
        return self.logt.critical


@dataclass(frozen=True)
class Club:
    members: tuple
    logt: object
    rank: int
    mean_final_level: float

    @property
    def weak(self):
        """Passes the test but with a negative slope estimate."""
        return self.logt.b_hat < 0.0

    @property
    def label(self):
        return f"Club {self.rank}"


@dataclass(frozen=True)
class ClubPartition:
    clubs: tuple
    divergent: tuple
    full_panel: object
    config: ClusterConfig

    def labels(self, unit_ids):
        """0-based club index per unit, ``-1`` for divergent units."""
        lookup = {u: c.rank - 1 for c in self.clubs for u in c.members}
        return np.array([lookup.get(u, -1) for u in unit_ids], dtype=int)


@dataclass(frozen=True)
class MergeTest:
    round: int
    ranks: tuple
    members: tuple
    result: object
    merged: bool

    @property
    def label(self):
        return "Club " + "+".join(str(r) for r in self.ranks)


@dataclass(frozen=True)
class TransitionTest:
    subset_a: tuple
    subset_b: tuple
    result: object

    @property
    def label(self):
        return f"{', '.join(self.subset_a)} plus {', '.join(self.subset_b)}"


class _GroupTester:
    """Memoised log-t statistic of sub-panels keyed by their unit set."""

    def __init__(self, panel, config):
        self.panel = panel
        self.config = config
        self._cache = {}

    def result(self, units):
        key = frozenset(units)
        if key not in self._cache:
            try:
                res = logt_test(self.panel.subset(sorted(key)), self.config.logt)
            except NumericalError:
                res = None
            self._cache[key] = res
        return self._cache[key]

    def t(self, units):
        res = self.result(units)
        return -math.inf if res is None else res.t_stat


def _final_window(panel, rule):
    rule = OrderingRule(rule)
    if rule is OrderingRule.LAST_OBSERVATION:
        return panel.values[:, -1:]
    half = math.ceil(panel.n_periods / 2)
    return panel.values[:, -half:]


def order_units(panel, rule=OrderingRule.MEAN_LAST_HALF):
    """Units sorted by descending final level, ties broken by label."""
    score = _final_window(panel, rule).mean(axis=1)
    keys = sorted(range(panel.n_units), key=lambda i: (-score[i], str(panel.unit_ids[i])))
    return [panel.unit_ids[i] for i in keys]


def mean_final_level(panel, units, rule=OrderingRule.MEAN_LAST_HALF):
    rows = [panel.unit_index(u) for u in units]
    return float(_final_window(panel, rule)[rows].mean())


def find_core_group(ordered, panel, config=None, _tester=None):
    """Core group of the highest-ranked units, or ``None`` if no pair passes."""
    config = config or ClusterConfig()
    tester = _tester or _GroupTester(panel, config)
    ordered = list(ordered)
    crit = config.critical
    for start in range(len(ordered) - 1):
        top = ordered[start:]
        if not tester.t(top[:2]) > crit:
            continue
        best_k, best_t = 2, tester.t(top[:2])
        for k in range(3, len(top) + 1):
            tk = tester.t(top[:k])
            if tk > crit and tk > best_t:
                best_k, best_t = k, tk
        return top[:best_k]
    return None


def sieve_members(core, candidates, panel, config=None, _tester=None):
    """Grow ``core`` into a club by admitting candidates one at a time.

    A candidate is admitted when core-plus-candidate has a log-t statistic
    above ``c_star``. When the admitted set fails the club test as a whole,
    the threshold is raised halfway toward the best candidate statistic and
    the sieve repeats. If that never settles the club is the core alone.
    """
    config = config or ClusterConfig()
    tester = _tester or _GroupTester(panel, config)
    core = list(core)
    candidates = [u for u in candidates if u not in core]
    scores = {u: tester.t(core + [u]) for u in candidates}
    c = config.c_star
    members = core
    for _ in range(config.max_sieve_iter):
        admitted = [u for u in candidates if scores[u] > c]
        members = core + admitted
        if not admitted or tester.t(members) >= config.critical:
            break
        c = 0.5 * (c + max(scores[u] for u in admitted))
    else:
        members = core
    # restore the global ordering sequence inside the club
    members = [u for u in _ordered_subset(panel, members, config)]
    return Club(
        members=tuple(members),
        logt=tester.result(members),
        rank=0,
        mean_final_level=mean_final_level(panel, members, config.ordering),
    )


def _ordered_subset(panel, units, config):
    wanted = set(units)
    return [u for u in order_units(panel, config.ordering) if u in wanted]


def _rank(clubs):
    clubs = sorted(clubs, key=lambda c: (-c.mean_final_level, c.members))
    return tuple(replace(c, rank=i + 1) for i, c in enumerate(clubs))


def cluster_all(panel, config=None):
    """Partition a screened log panel into convergence clubs and divergent units."""
    config = config or ClusterConfig()
    tester = _GroupTester(panel, config)
    full = logt_test(panel, config.logt)
    remaining = order_units(panel, config.ordering)
    clubs = []
    divergent = []
    while remaining:
        if len(remaining) < 2:
            divergent.extend(remaining)
            break
        if tester.t(remaining) >= config.critical:
            clubs.append(
                Club(
                    tuple(remaining),
                    tester.result(remaining),
                    0,
                    mean_final_level(panel, remaining, config.ordering),
                )
            )
            break
        core = find_core_group(remaining, panel, config, tester)
        if core is None:
            divergent.extend(remaining)
            break
        rest = [u for u in remaining if u not in core]
        club = sieve_members(core, rest, panel, config, tester)
        clubs.append(club)
        taken = set(club.members)
        remaining = [u for u in remaining if u not in taken]
    return ClubPartition(_rank(clubs), tuple(divergent), full, config)


def merge_clubs(partition, panel, config=None):
    """Merge adjacent clubs whose union passes the log-t test.

    Every round tests all adjacent pairs of the current partition, then
    merges the highest-ranked passing pair and starts over. Returns the
    merged partition and the list of every test performed.
    """
    config = config or partition.config
    tester = _GroupTester(panel, config)
    clubs = list(partition.clubs)
    tests = []
    rnd = 0
    while len(clubs) > 1:
        rnd += 1
        passing = None
        for a, b in zip(clubs, clubs[1:]):
            members = a.members + b.members
            res = tester.result(members)
            ok = res is not None and res.t_stat >= config.critical
            if ok and passing is None:
                passing = (a, b, res)
            tests.append(MergeTest(rnd, (a.rank, b.rank), members, res, False))
        if passing is None:
            break
        a, b, res = passing
        idx = [i for i, t in enumerate(tests) if t.round == rnd and t.ranks == (a.rank, b.rank)][0]
        tests[idx] = replace(tests[idx], merged=True)
        members = tuple(_ordered_subset(panel, a.members + b.members, config))
        merged = Club(members, res, 0, mean_final_level(panel, members, config.ordering))
        i = clubs.index(a)
        clubs[i : i + 2] = [merged]
        clubs = list(_rank(clubs))
    out = replace(partition, clubs=tuple(clubs))
    return out, tests


def transition_test(panel, subset_a, subset_b, config=None):
    """Log-t test on the union of two disjoint unit subsets."""
    config = config or ClusterConfig()
    subset_a, subset_b = list(subset_a), list(subset_b)
    overlap = set(subset_a) & set(subset_b)
    if overlap:
        raise OverlappingSubsets(f"units in both subsets: {sorted(overlap)}")
    for u in subset_a + subset_b:
        if u not in panel.unit_ids:
            raise UnknownUnit(f"unit {u!r} not in panel")
    union = subset_a + subset_b
    if len(union) < 2:
        raise InputError("transition test needs at least two units")
    logt_cfg = config.logt if isinstance(config, ClusterConfig) else config
    return logt_test(panel.subset(union), logt_cfg)


def tail_head_subsets(partition, rank, k_tail, k_head):
    """Last ``k_tail`` members of club ``rank`` and first ``k_head`` of the next club.

    A convenience split for transition probes between contiguous clubs.
    """
    by_rank = {c.rank: c for c in partition.clubs}
    if rank not in by_rank or rank + 1 not in by_rank:
        raise InputError(f"no adjacent club pair at rank {rank}")
    upper, lower = by_rank[rank].members, by_rank[rank + 1].members
    return upper[len(upper) - k_tail :] if k_tail else (), lower[:k_head]
