"""Visit-time vectors and norm objectives.

A route is a permutation of the vertices starting at the instance's start
vertex. Its visit times are the prefix sums of consecutive distances; every
objective here is a function of that vector: Minkowski p-norms (including the
max norm) and Top-k partial sums, the finite family that certifies bounds for
every monotone symmetric norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .metrics import Instance

Route = Sequence[int]


class RouteError(ValueError):
    """Raised when a route is not a valid permutation from the start vertex."""


@dataclass(frozen=True)
class Lp:
    """Minkowski p-norm objective; p = math.inf selects the max norm."""

    p: float

    def __post_init__(self) -> None:
        if math.isnan(self.p) or self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")


@dataclass(frozen=True)
class TopK:
    """Sum of the k largest visit times."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class AllNorm:
    """Marker objective for all-norm verification; not directly evaluable."""


Objective = Union[Lp, TopK, AllNorm]

L1 = Lp(1.0)
L2 = Lp(2.0)
LINF = Lp(math.inf)


@dataclass(frozen=True, eq=False)
class VisitTimes:
    """Visit times of a route: per-vertex and in nondecreasing order.

    Since distances are nonnegative, the sorted vector equals the per-vertex
    times read in visit order.
    """

    by_vertex: np.ndarray
    sorted: np.ndarray


def check_route(instance: Instance, route: Route) -> None:
    order = list(route)
    n = instance.n
    if len(order) != n or sorted(order) != list(range(n)):
        raise RouteError(f"route is not a permutation of 0..{n - 1}")
    if order[0] != instance.start:
        raise RouteError(f"route must start at {instance.start}, got {order[0]}")


def visit_times(instance: Instance, route: Route) -> VisitTimes:
    """Prefix-sum visit times of a route; validates the route first."""
    check_route(instance, route)
    order = np.asarray(route, dtype=np.int64)
    steps = instance.dist[order[:-1], order[1:]]
    in_order = np.concatenate([[0.0], np.cumsum(steps)])
    by_vertex = np.empty(instance.n)
    by_vertex[order] = in_order
    return VisitTimes(by_vertex=by_vertex, sorted=in_order)


def _sorted_vector(times: VisitTimes | Sequence[float]) -> np.ndarray:
    if isinstance(times, VisitTimes):
        return times.sorted
    return np.sort(np.asarray(times, dtype=float))


def norm(times: VisitTimes | Sequence[float], obj: Objective) -> float:
    """Evaluate a norm objective on a visit-time vector."""
    v = _sorted_vector(times)
    if isinstance(obj, Lp):
        if math.isinf(obj.p):
            return float(v[-1]) if v.size else 0.0
        if obj.p == 1:
            return float(v.sum())
        return float((v**obj.p).sum() ** (1.0 / obj.p))
    if isinstance(obj, TopK):
        k = min(obj.k, v.size)
        return float(v[v.size - k :].sum())
    raise ValueError(f"objective {obj!r} is not directly evaluable")


def topk_sums(times: VisitTimes | Sequence[float]) -> np.ndarray:
    """All Top-k partial sums at once; entry k-1 is the sum of the k largest."""
    v = _sorted_vector(times)
    return np.cumsum(v[::-1])


def submajorization_factor(
    x: VisitTimes | Sequence[float], y: VisitTimes | Sequence[float]
) -> float:
    """Smallest alpha such that every Top-k sum of x is <= alpha * that of y.

    By Ky Fan dominance this equals the supremum of ||x|| / ||y|| over all
    monotone symmetric norms. Conventions: 0/0 counts as 1, positive/0 as inf.
    """
    tx = topk_sums(x)
    ty = topk_sums(y)
    if tx.size != ty.size:
        raise ValueError("vectors must have the same length")
    best = 1.0
    for a, b in zip(tx, ty):
        if b > 0:
            best = max(best, a / b)
        elif a > 0:
            return math.inf
    return best


def parse_norm(text: str) -> Objective:
    """Parse the CLI norm selector: l1 | l2 | lp:<p> | linf | topk:<k>."""
    t = text.strip().lower()
    if t == "l1":
        return L1
    if t == "l2":
        return L2
    if t == "linf":
        return LINF
    if t.startswith("lp:"):
        return Lp(float(t[3:]))
    if t.startswith("topk:"):
        return TopK(int(t[5:]))
    raise ValueError(f"unknown norm selector {text!r}")


def norm_label(obj: Objective) -> str:
    if isinstance(obj, Lp):
        if math.isinf(obj.p):
            return "linf"
        if obj.p == 1:
            return "l1"
        if obj.p == 2:
            return "l2"
        return f"lp:{obj.p:g}"
    if isinstance(obj, TopK):
        return f"topk:{obj.k}"
    return "allnorm"
