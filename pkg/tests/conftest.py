import hypothesis
import numpy as np
import pytest

from pickqubo.instance import make_instance

hypothesis.settings.register_profile("default", deadline=None, max_examples=60)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")


def metric_matrix(rng, size, low=1, high=10):
    """Random symmetric integer matrix closed under shortest paths (triangle inequality holds)."""
    d = rng.integers(low, high + 1, size=(size, size)).astype(float)
    d = np.triu(d, 1)
    d = d + d.T
    for k in range(size):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def random_instance(rng, n, K, M, weights=None, max_weight=None):
    if weights is None:
        weights = rng.integers(0, (max_weight or M) + 1, size=n).tolist()
    return make_instance(weights, M, K, distances=metric_matrix(rng, n + 1))


def toy(n_weights, M, K=1, d=None):
    """Small explicit instance; ``d`` defaults to d01=1, d02=2, d12=3 style values."""
    n = len(n_weights)
    if d is None:
        base = {1: [[0, 1], [1, 0]], 2: [[0, 1, 2], [1, 0, 3], [2, 3, 0]]}
        d = base[n]
    return make_instance(n_weights, M, K, distances=d)


def all_bits(num_vars, start=0, stop=None):
    stop = (1 << num_vars) if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(num_vars)) & 1).astype(np.uint8)


@pytest.fixture
def rng():
    return np.random.default_rng(20211)
