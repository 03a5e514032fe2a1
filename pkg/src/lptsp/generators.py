"""Deterministic instance generators for benchmarks and the worked examples."""
from __future__ import annotations

import math

import numpy as np

from .lowerbound import appendix_instance
from .metrics import Euclidean2D, Instance, LineMetric, WeightedTree, make_instance

KINDS = ("line", "euclidean", "tree", "circle", "figure1", "appendix", "powers2")


def gen_line(n: int, seed: int) -> Instance:
    rng = np.random.default_rng(seed)
    coords = tuple(float(x) for x in rng.uniform(-10.0, 10.0, n))
    return make_instance(0, LineMetric(coords))


def gen_euclidean(n: int, seed: int) -> Instance:
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, (n, 2))
    return make_instance(0, Euclidean2D(tuple((float(x), float(y)) for x, y in pts)))


def gen_tree(n: int, seed: int) -> Instance:
    rng = np.random.default_rng(seed)
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        w = float(rng.uniform(0.1, 2.0))
        edges.append((u, v, w))
    return make_instance(0, WeightedTree(n, tuple(edges)))


def gen_circle(n: int, m: int, epsilon: float = 0.5) -> Instance:
    """Unit-circle instance with m materialized copies at the cluster angle."""
    pts = [(1.0, 0.0)]
    for k in range(1, n - 1):
        a = 2 * math.pi * k / n
        pts.append((math.cos(a), math.sin(a)))
    a = 2 * math.pi * (n - 1 - epsilon) / n
    pts.extend([(math.cos(a), math.sin(a))] * m)
    return make_instance(0, Euclidean2D(tuple(pts)))


def gen_figure1(epsilon: float = 0.01) -> Instance:
    """Four points on a line where the p=1 and p=2 optima diverge."""
    return make_instance(0, LineMetric((0.0, -1.0 - epsilon, 1.0, 2.0)))


def gen_appendix() -> Instance:
    return appendix_instance().to_instance()


def gen_powers2(n: int) -> Instance:
    """Start at 0 with service points at 1, 2, 4, ..., 2^(n-1)."""
    coords = (0.0,) + tuple(float(2**i) for i in range(n))
    return make_instance(0, LineMetric(coords))


def generate(
    kind: str, n: int = 8, seed: int = 0, epsilon: float | None = None, m: int = 1
) -> Instance:
    """Dispatch by kind; deterministic given the parameters."""
    if kind == "line":
        return gen_line(n, seed)
    if kind == "euclidean":
        return gen_euclidean(n, seed)
    if kind == "tree":
        return gen_tree(n, seed)
    if kind == "circle":
        return gen_circle(n, m, 0.5 if epsilon is None else epsilon)
    if kind == "figure1":
        return gen_figure1(0.01 if epsilon is None else epsilon)
    if kind == "appendix":
        return gen_appendix()
    if kind == "powers2":
        return gen_powers2(n)
    raise ValueError(f"unknown instance kind {kind!r}; choose from {KINDS}")
