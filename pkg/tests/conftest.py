import numpy as np
import pytest

from figs import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_dataset(
    seed: int,
    n: int = 40,
    d: int = 4,
    *,
    weighted: bool = False,
    binary: bool = False,
) -> Dataset:
    """Small random regression/classification dataset, deterministic per seed."""
    gen = np.random.default_rng(seed)
    x = gen.random((n, d))
    if binary:
        y = (x[:, 0] + 0.3 * gen.standard_normal(n) > 0.5).astype(np.float64)
        if y.min() == y.max():  # both classes must be present
            y[0] = 1.0 - y[0]
    else:
        y = x[:, 0] - 2.0 * (x[:, 1] > 0.5) + 0.1 * gen.standard_normal(n)
    weights = None
    if weighted:
        weights = gen.integers(0, 4, size=n).astype(np.float64)
        if weights.sum() == 0:
            weights[0] = 1.0
    return Dataset(features=x, targets=y, weights=weights)
