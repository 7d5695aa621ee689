import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from looptrees.excursion import make_excursion

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_excursion(rng: np.random.Generator, max_breakpoints: int = 20, grid: bool | None = None):
    """Random piecewise-linear excursion; with ``grid`` values sit on multiples of 1/8 (ties)."""
    m = int(rng.integers(2, max_breakpoints + 1))
    if grid is None:
        grid = bool(rng.random() < 0.4)
    inner = np.sort(rng.choice(np.arange(1, 1000), size=m - 2, replace=False) / 1000.0)
    bp = [(0.0, 0.0, _val(rng, grid) if rng.random() < 0.7 else 0.0)]
    for t in inner:
        left = _val(rng, grid)
        jump = _val(rng, grid) if rng.random() < 0.5 else 0.0
        bp.append((float(t), left, left + jump))
    bp.append((1.0, 0.0, 0.0))
    return make_excursion(bp)


def _val(rng, grid: bool) -> float:
    if grid:
        return float(rng.integers(0, 9)) / 8
    return float(rng.random())


def excursion_suite(count: int, seed: int = 12345):
    rng = np.random.default_rng(seed)
    return [random_excursion(rng) for _ in range(count)]


@st.composite
def excursions(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_excursion(np.random.default_rng(seed))


A_BP = [(0, 0, 1), (1, 0, 0)]
B_BP = [(0, 0, 0), (0.5, 0.5, 0.5), (1, 0, 0)]
M_BP = [(0, 0, 0), (0.25, 0.25, 0.75), (1, 0, 0)]


@pytest.fixture
def A():
    return make_excursion(A_BP)


@pytest.fixture
def B():
    return make_excursion(B_BP)


@pytest.fixture
def M():
    return make_excursion(M_BP)
