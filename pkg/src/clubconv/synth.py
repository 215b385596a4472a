"""Synthetic panels from the single-factor model ``y_it = delta_it * mu_t``.

Transition parameters follow

    delta_it = delta_c + sigma_i * xi_it * t ** (-alpha_c)

with ``xi_it`` i.i.d. standard normal and ``c`` the unit's club. The
slowly varying function of the original methodology is fixed at 1. Each
unit draws from its own child stream of ``numpy.random.SeedSequence`` so
the panel does not depend on generation order.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import NonPositiveOutput
from .panel import Scale, build_panel

MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class SyntheticSpec:
    club_sizes: tuple = (28,)
    delta_levels: tuple = (1.0,)
    alpha: object = 0.5
    noise_sigma: object = 0.05
    mu_kind: str = "linear_trend"
    mu_slope: float = 0.02
    mu_drift: float = 0.02
    mu_step_sigma: float = 0.01
    T: int = 27
    seed: int = 0
    first_period: int = 1
    unit_prefix: str = "U"

    def __post_init__(self):
        object.__setattr__(self, "club_sizes", tuple(int(n) for n in self.club_sizes))
        object.__setattr__(self, "delta_levels", tuple(float(d) for d in self.delta_levels))
        if len(self.club_sizes) != len(self.delta_levels):
            raise ValueError("club_sizes and delta_levels must have equal length")
        if any(n < 1 for n in self.club_sizes):
            raise ValueError("club sizes must be positive")
        if self.mu_kind not in ("linear_trend", "random_walk_with_drift"):
            raise ValueError(f"unknown mu_kind {self.mu_kind!r}")
        if self.T < 2:
            raise ValueError("T must be at least 2")

    @property
    def n_units(self):
        return sum(self.club_sizes)

    def per_club(self, value):
        if np.ndim(value) == 0:
            return [float(value)] * len(self.club_sizes)
        value = [float(v) for v in value]
        if len(value) != len(self.club_sizes):
            raise ValueError("per-club parameter has the wrong length")
        return value

    def per_unit_sigma(self):
        if np.ndim(self.noise_sigma) == 0:
            return np.full(self.n_units, float(self.noise_sigma))
        sigma = np.asarray(self.noise_sigma, dtype=np.float64)
        if sigma.shape != (self.n_units,):
            raise ValueError("noise_sigma must be a scalar or one value per unit")
        return sigma

    def to_config(self):
        """Flat ``key=value`` mapping, the same format as CLI config files."""
        d = asdict(self)
        out = {}
        for key, value in d.items():
            if isinstance(value, (tuple, list)):
                value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            out[key] = str(value)
        return out

    @classmethod
    def from_config(cls, mapping):
        kw = {}
        for key, value in mapping.items():
            if key in ("club_sizes",):
                kw[key] = tuple(int(v) for v in str(value).split(","))
            elif key in ("delta_levels",):
                kw[key] = tuple(float(v) for v in str(value).split(","))
            elif key in ("alpha", "noise_sigma"):
                parts = str(value).split(",")
                kw[key] = float(parts[0]) if len(parts) == 1 else tuple(float(v) for v in parts)
            elif key in ("T", "seed", "first_period"):
                kw[key] = int(value)
            elif key in ("mu_slope", "mu_drift", "mu_step_sigma"):
                kw[key] = float(value)
            elif key in ("mu_kind", "unit_prefix"):
                kw[key] = str(value)
            else:
                raise ValueError(f"unknown synthetic spec key {key!r}")
        return cls(**kw)


def _common_component(spec, rng):
    t = np.arange(spec.T, dtype=np.float64)
    if spec.mu_kind == "linear_trend":
        return 1.0 + spec.mu_slope * t
    steps = spec.mu_drift + spec.mu_step_sigma * rng.standard_normal(spec.T - 1)
    return np.concatenate([[1.0], 1.0 + np.cumsum(steps)])


def _draw(spec, attempt):
    root = np.random.SeedSequence([spec.seed, attempt])
    mu_seq, *unit_seqs = root.spawn(spec.n_units + 1)
    mu = _common_component(spec, np.random.default_rng(mu_seq))
    t = np.arange(1, spec.T + 1, dtype=np.float64)
    sigma = spec.per_unit_sigma()
    alphas = spec.per_club(spec.alpha)
    delta = np.empty((spec.n_units, spec.T))
    labels = np.empty(spec.n_units, dtype=int)
    i = 0
    for c, (size, level) in enumerate(zip(spec.club_sizes, spec.delta_levels)):
        decay = t ** (-alphas[c])
        for _ in range(size):
            xi = np.random.default_rng(unit_seqs[i]).standard_normal(spec.T)
            delta[i] = level + sigma[i] * xi * decay
            labels[i] = c
            i += 1
    return delta * mu, labels


def generate_panel(spec):
    """Draw a log-scale panel. Returns ``(panel, true_labels)``.

    ``true_labels[i]`` is the 0-based club index of unit ``i``. Draws with a
    non-positive value are rejected and redrawn.
    """
    for attempt in range(MAX_ATTEMPTS):
        y, labels = _draw(spec, attempt)
        if np.all(y > 0.0):
            break
    else:
        raise NonPositiveOutput(
            f"no strictly positive draw after {MAX_ATTEMPTS} attempts for {spec!r}"
        )
    width = len(str(spec.n_units))
    units = [f"{spec.unit_prefix}{i + 1:0{width}d}" for i in range(spec.n_units)]
    periods = list(range(spec.first_period, spec.first_period + spec.T))
    return build_panel(units, periods, y, scale=Scale.LOG), labels


def as_raw_index(panel):
    """Exponentiate a log panel so that ``to_log`` recovers it."""
    return build_panel(panel.unit_ids, panel.period_labels, np.exp(panel.values))


def recovery_score(groups, unit_ids, truth):
    """Compare recovered clubs with the true labels.

    ``groups`` is a sequence of member lists (units in none of them count as
    misassigned). Recovered and true clubs are matched one-to-one to
    maximise agreement. Returns ``(exact, accuracy)`` where ``exact`` means
    the recovered partition equals the true one.
    """
    from scipy.optimize import linear_sum_assignment

    truth = np.asarray(truth)
    index = {u: i for i, u in enumerate(unit_ids)}
    classes = np.unique(truth)
    table = np.zeros((len(groups), classes.size), dtype=int)
    for g, members in enumerate(groups):
        for u in members:
            table[g, np.searchsorted(classes, truth[index[u]])] += 1
    rows, cols = linear_sum_assignment(-table) if len(groups) else ((), ())
    correct = int(table[rows, cols].sum()) if len(groups) else 0
    true_sets = {frozenset(u for u, c in zip(unit_ids, truth) if c == k) for k in classes}
    found_sets = {frozenset(m) for m in groups}
    return found_sets == true_sets, correct / len(unit_ids)
