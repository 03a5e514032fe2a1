"""Shared helpers: deterministic random instances of every geometry."""
import numpy as np
import pytest

from lptsp.generators import gen_euclidean, gen_line, gen_tree

KIND_GENS = {"euclidean": gen_euclidean, "tree": gen_tree, "line": gen_line}


def mixed_instance(index: int, n: int, seed_base: int = 0):
    """Cycle through the geometries deterministically."""
    kind = ("euclidean", "tree", "line")[index % 3]
    return KIND_GENS[kind](n, seed_base + index)


def random_times(rng: np.random.Generator, n: int) -> np.ndarray:
    """A plausible sorted visit-time vector (nonnegative, leading zero)."""
    return np.concatenate([[0.0], np.sort(rng.uniform(0.0, 10.0, n - 1))])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
