import numpy as np
import pytest

from confsurv.data import Dataset


@pytest.fixture
def three_row_data() -> Dataset:
    """Rows (1, event), (2, censored), (3, event); no covariates."""
    return Dataset([1.0, 2.0, 3.0], [True, False, True], np.empty((3, 0)))


@pytest.fixture
def tied_data() -> Dataset:
    """A failure and a censoring tied at t=1, plus a failure at t=2."""
    return Dataset([1.0, 1.0, 2.0], [True, False, True], np.empty((3, 0)))


def random_censored_dataset(gen: np.random.Generator, max_n: int = 50) -> Dataset:
    """Small dataset with heavy ties and mixed censoring (at least one event)."""
    n = int(gen.integers(1, max_n + 1))
    if gen.random() < 0.5:
        times = gen.integers(1, 9, size=n).astype(float)
    else:
        times = np.round(gen.exponential(2.0, size=n) + 0.1, 1)
    events = gen.random(n) < gen.uniform(0.3, 1.0)
    if not events.any():
        events[int(gen.integers(0, n))] = True
    p = int(gen.integers(0, 3))
    x = gen.standard_normal((n, p))
    return Dataset(times, events, x)
