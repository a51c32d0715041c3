import numpy as np
import pytest

from lattice_recon import IndexSet, random_downward_closed


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_nonneg_set(rng, dimension, size, max_component=4) -> IndexSet:
    """Random nonnegative index set (not necessarily downward closed)."""
    rows = {tuple(int(v) for v in rng.integers(0, max_component + 1,
                                               size=dimension))
            for _ in range(size)}
    return IndexSet(sorted(rows), dimension=dimension, domain="nonneg")


def random_signed_set(rng, dimension, size, max_component=4) -> IndexSet:
    rows = {tuple(int(v) for v in rng.integers(-max_component,
                                               max_component + 1,
                                               size=dimension))
            for _ in range(size)}
    return IndexSet(sorted(rows), dimension=dimension)


def random_downward(rng, dimension, size) -> IndexSet:
    return random_downward_closed(rng, dimension, size)
