"""Routing via geometric partial covering.

Subtours of geometrically growing length budgets each traverse the largest
good k-tree that fits the budget; concatenating the traversals and
short-cutting revisits yields the output route. With budget ratio 2 and exact
k-trees the k-th sorted visit time is within 8x of the optimal k-stroll for
every k simultaneously, which bounds every monotone symmetric norm. With
ratio ~2.54, a log-uniform random initial budget, and coin-flip subtour
reversal, the same scheme gives the randomized squared-delay guarantee for
the p = 2 objective.
"""
from __future__ import annotations

import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .exact import STROLL_MAX_N
from .ktree import GoodKTree, good_k_tree_pd, good_k_tree_sweep
from .metrics import Instance
from .objectives import L2, norm, visit_times

TFP_GROWTH = 2.54
_BUDGET_TOL = 1e-9


def default_tree_sweep(instance: Instance) -> list[GoodKTree]:
    """Exact k-tree sweep where the subset enumeration is affordable, the
    primal-dual construction beyond it."""
    if instance.n <= STROLL_MAX_N:
        return good_k_tree_sweep(instance)
    return [good_k_tree_pd(instance, k) for k in range(1, instance.n + 1)]


@dataclass(frozen=True)
class Subtour:
    budget: float
    tree: GoodKTree
    traversal: tuple[int, ...]
    reversed: bool


@dataclass(frozen=True, eq=False)
class CoverSchedule:
    """Execution record of a geometric cover run.

    walk_times[v] is the clock at which v was first reached while physically
    driving the subtours (each returns to the origin); the output route's
    metric visit times are pointwise no larger, by the triangle inequality.
    """

    b: float
    c: float
    subtours: tuple[Subtour, ...]
    walk_times: np.ndarray


@lru_cache(maxsize=65536)
def _dfs_walk(tree: GoodKTree, reverse: bool) -> tuple[tuple[int, ...], tuple[float, ...]]:
    adj: dict[int, list[tuple[int, float]]] = {v: [] for v in tree.vertices}
    for u, v, w in tree.edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    order: list[int] = []
    arrive: list[float] = []
    clock = 0.0

    def go(v: int, parent: int) -> None:
        nonlocal clock
        order.append(v)
        arrive.append(clock)
        for u, w in sorted(adj[v], reverse=reverse):
            if u == parent:
                continue
            clock += w
            go(u, v)
            clock += w

    go(tree.root, -1)
    return tuple(order), tuple(arrive)


def dfs_traversal(tree: GoodKTree, reverse: bool = False) -> list[int]:
    """Depth-first visit order from the tree root.

    Children are taken in ascending vertex index, or descending when
    `reverse` is set. The underlying walk (returning to the root) has length
    exactly twice the tree weight.
    """
    return list(_dfs_walk(tree, reverse)[0])


def sweep_provider(trees: Sequence[GoodKTree]) -> Callable[[float], GoodKTree]:
    """Budget -> largest-cardinality tree of weight within the budget."""
    ordered = sorted(trees, key=lambda t: t.k)

    def provider(budget: float) -> GoodKTree:
        best = ordered[0]
        for t in ordered:
            if t.weight <= budget * (1 + _BUDGET_TOL):
                best = t
        return best

    return provider


def geometric_cover(
    instance: Instance,
    b: float,
    c: float,
    tree_provider: Callable[[float], GoodKTree],
    reversal: Optional[Callable[[int], bool]] = None,
) -> tuple[list[int], CoverSchedule]:
    """Concatenate subtour traversals at budgets b*c^i until all covered.

    Returns the first-visit order (revisits short-cut) together with the
    schedule. `reversal(i)` decides whether subtour i's traversal runs with
    descending child order; None means never. Vertices coincident with the
    start are emitted first: their visit time is zero under any norm.
    """
    n, s = instance.n, instance.start
    if not (b > 0 and c > 1):
        raise ValueError(f"need b > 0 and c > 1, got b={b}, c={c}")
    D = instance.dist
    visited = np.zeros(n, dtype=bool)
    visited[s] = True
    order = [s]
    walk_times = np.zeros(n)
    for v in range(n):
        if v != s and D[s, v] == 0:
            visited[v] = True
            order.append(v)

    subtours: list[Subtour] = []
    clock = 0.0
    i = 0
    while len(order) < n:
        budget = b * c**i
        tree = tree_provider(budget)
        if tree.weight > budget * (1 + _BUDGET_TOL):
            raise ValueError(
                f"tree provider returned weight {tree.weight} over budget {budget}"
            )
        if tree.k >= 2:
            rev = bool(reversal(i)) if reversal is not None else False
            seq, arrive = _dfs_walk(tree, rev)
            for v, t in zip(seq, arrive):
                if not visited[v]:
                    visited[v] = True
                    order.append(v)
                    walk_times[v] = clock + t
            clock += 2 * tree.weight
            subtours.append(Subtour(budget, tree, seq, rev))
        i += 1
        if i > 10_000:
            raise RuntimeError("geometric cover failed to terminate")

    return order, CoverSchedule(b, c, tuple(subtours), walk_times)


def _min_positive_distance(instance: Instance) -> float:
    D = instance.dist
    pos = D[D > 0]
    return float(pos.min()) if pos.size else 0.0


def _identity_order(instance: Instance) -> list[int]:
    return [instance.start] + [v for v in range(instance.n) if v != instance.start]


def allnorm_approx(instance: Instance, trees: Sequence[GoodKTree] | None = None) -> list[int]:
    """The 8-approximate route for every monotone symmetric norm at once.

    Geometric cover with the minimum positive pairwise distance as base
    budget and ratio 2 (the base is not normalized away: norms are
    homogeneous, so using the actual minimum is equivalent). A precomputed
    exact k-tree sweep may be passed in; with exact trees the k-th sorted
    visit time is at most 8x the optimal k-stroll for every k.
    """
    if instance.n == 1:
        return [instance.start]
    b = _min_positive_distance(instance)
    if b == 0:
        return _identity_order(instance)
    if trees is None:
        trees = default_tree_sweep(instance)
    route, _ = geometric_cover(instance, b, 2.0, sweep_provider(trees))
    return route


def tfp_approx(
    instance: Instance, seed: int, trees: Sequence[GoodKTree] | None = None
) -> list[int]:
    """Randomized squared-delay route: ratio c = 2.54, budget base c^U.

    U is uniform on [0, 1] and each subtour is reversed on a fair coin; all
    randomness comes from `seed`, so equal seeds give equal routes. The base
    is scaled by the minimum positive distance (norm homogeneity, as in
    allnorm_approx). In expectation the squared 2-norm is within
    tfp_constant(2.54) <= 31.82 of optimal.
    """
    if instance.n == 1:
        return [instance.start]
    dmin = _min_positive_distance(instance)
    if dmin == 0:
        return _identity_order(instance)
    if trees is None:
        trees = default_tree_sweep(instance)
    rng = random.Random(seed)
    b = dmin * TFP_GROWTH ** rng.random()
    coins: dict[int, bool] = {}

    def reversal(i: int) -> bool:
        # subtours are requested in increasing i, so draws stay aligned
        if i not in coins:
            coins[i] = rng.random() < 0.5
        return coins[i]

    route, _ = geometric_cover(instance, b, TFP_GROWTH, sweep_provider(trees), reversal)
    return route


def _worker_cap() -> int:
    try:
        return max(1, int(os.environ.get("LPTSP_THREADS", "1")))
    except ValueError:
        return 1


def tfp_derandomized(
    instance: Instance, grid_size: int, trees: Sequence[GoodKTree] | None = None
) -> list[int]:
    """Deterministic squared-delay route: try a budget grid and sign patterns.

    The random budget is replaced by a geometric grid of `grid_size` points
    in [1, c) (times the minimum positive distance) and the coin flips by
    fixed reversal patterns (all-forward, plus all-reversed and alternating
    once the grid has at least two points). The best candidate under the
    2-norm wins; any pattern set is admissible since only the minimum over
    candidates is claimed. grid_size=1 is exactly the base-budget forward
    cover, and doubling the grid only extends the candidate set.
    """
    if grid_size < 1:
        raise ValueError(f"grid_size must be >= 1, got {grid_size}")
    if instance.n == 1:
        return [instance.start]
    dmin = _min_positive_distance(instance)
    if dmin == 0:
        return _identity_order(instance)
    if trees is None:
        trees = default_tree_sweep(instance)
    provider = sweep_provider(trees)

    patterns: list[Optional[Callable[[int], bool]]] = [None]
    if grid_size >= 2:
        patterns += [lambda i: True, lambda i: bool(i & 1)]
    candidates = [
        (dmin * TFP_GROWTH ** (t / grid_size), pat)
        for t in range(grid_size)
        for pat in patterns
    ]

    def evaluate(cand: tuple[float, Optional[Callable[[int], bool]]]) -> tuple[float, list[int]]:
        b, pat = cand
        route, _ = geometric_cover(instance, b, TFP_GROWTH, provider, pat)
        return norm(visit_times(instance, route), L2), route

    cap = _worker_cap()
    if cap > 1:
        with ThreadPoolExecutor(max_workers=min(cap, len(candidates))) as pool:
            results = list(pool.map(evaluate, candidates))
    else:
        results = [evaluate(c) for c in candidates]

    best_val, best_route = results[0]
    for val, route in results[1:]:
        if val < best_val:
            best_val, best_route = val, route
    return best_route


def tfp_constant(c: float) -> float:
    """The expectation bound 2c^2(c+1) / ((c-1) ln c); ~31.82 at c = 2.54."""
    if not c > 1:
        raise ValueError(f"growth ratio must exceed 1, got {c}")
    return 2 * c * c * (c + 1) / ((c - 1) * math.log(c))
