import numpy as np
import pytest

from clubconv.panel import Scale, build_panel
from clubconv.synth import SyntheticSpec, generate_panel

ACCEPTANCE_LOG = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LOG:
        terminalreporter.write_line(line)


def log_panel(values, units=None, periods=None):
    values = np.asarray(values, dtype=float)
    units = units or [f"u{i}" for i in range(values.shape[0])]
    periods = periods or list(range(1, values.shape[1] + 1))
    return build_panel(units, periods, values, scale=Scale.LOG)


def four_clubs(seed, alpha=1.0, sigma=0.05, size=7, T=27, levels=(2.5, 2.0, 1.5, 1.0)):
    spec = SyntheticSpec(
        club_sizes=(size,) * len(levels),
        delta_levels=levels,
        alpha=alpha,
        noise_sigma=sigma,
        T=T,
        seed=seed,
    )
    return generate_panel(spec)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
