"""Exact solvers used as oracles by every verification suite.

Two independent routes to the optimum: factorial enumeration (the literal
objective definition) and a subset dynamic program with Pareto-pruned labels.
Also the exact k-stroll: the shortest path from the start visiting at least k
vertices, endpoint free.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .metrics import Instance
from .objectives import Lp, Objective, TopK

BRUTE_MAX_N = 11
PARETO_MAX_N = 20
STROLL_MAX_N = 15

_CHUNK = 40320  # permutations per vectorized block


@dataclass(frozen=True)
class ParetoLabel:
    """One nondominated (length, cost) state of a partial route."""

    length: float
    cost: float
    parent: Optional[tuple[int, int, int]]  # (mask, last, index) or None
    vertex: int


def _perm_chunks(items: list[int]) -> Iterator[np.ndarray]:
    it = itertools.permutations(items)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64)


def brute_force_opt(instance: Instance, obj: Objective) -> tuple[list[int], float]:
    """Exact optimum by enumerating all routes in lexicographic order.

    Ties are broken toward the lexicographically smallest route (the first
    one enumerated attaining the minimum). Guarded at n <= 11.
    """
    n = instance.n
    if n > BRUTE_MAX_N:
        raise ValueError(f"brute force guarded at n <= {BRUTE_MAX_N}, got {n}")
    s = instance.start
    if n == 1:
        return [s], 0.0
    others = [v for v in range(n) if v != s]
    D = instance.dist

    best_key = math.inf
    best_route: list[int] = []
    for chunk in _perm_chunks(others):
        prev = np.concatenate([np.full((chunk.shape[0], 1), s), chunk[:, :-1]], axis=1)
        times = np.cumsum(D[prev, chunk], axis=1)  # sorted: prefix sums
        if isinstance(obj, Lp) and math.isinf(obj.p):
            vals = times[:, -1]
        elif isinstance(obj, Lp):
            vals = (times**obj.p).sum(axis=1)  # compare in power domain
        elif isinstance(obj, TopK):
            kk = min(obj.k, n - 1)  # the implicit leading 0 never contributes
            vals = times[:, times.shape[1] - kk :].sum(axis=1)
        else:
            raise ValueError(f"objective {obj!r} not supported")
        i = int(np.argmin(vals))
        if vals[i] < best_key:
            best_key = float(vals[i])
            best_route = [s] + chunk[i].tolist()

    value = best_key
    if isinstance(obj, Lp) and not math.isinf(obj.p) and obj.p != 1:
        value = best_key ** (1.0 / obj.p)
    return best_route, float(value)


def _round12(x: float) -> float:
    """Round to 12 significant digits; keeps Pareto frontiers deterministic."""
    if x == 0 or not math.isfinite(x):
        return x
    return round(x, 12 - 1 - int(math.floor(math.log10(abs(x)))))


def _route_of(
    frontiers: dict[tuple[int, int], list[ParetoLabel]],
    state: tuple[int, int, int],
) -> list[int]:
    out = []
    cur: Optional[tuple[int, int, int]] = state
    while cur is not None:
        mask, last, idx = cur
        label = frontiers[(mask, last)][idx]
        out.append(label.vertex)
        cur = label.parent
    out.reverse()
    return out


def pareto_dp_opt(
    instance: Instance, obj: Objective, prune: bool = True
) -> tuple[list[int], float]:
    """Exact optimum via subset DP over (visited set, last vertex) states.

    Each state keeps a Pareto frontier of (accumulated length, accumulated
    cost) labels: the cost of any continuation depends on the prefix only
    through those two numbers, so dominated labels can never win. Supports
    finite-p Lp and TopK; use brute_force_opt for the max norm. `prune=False`
    disables dominance filtering (soundness checks only).
    """
    n = instance.n
    if n > PARETO_MAX_N:
        raise ValueError(f"pareto DP guarded at n <= {PARETO_MAX_N}, got {n}")
    if isinstance(obj, Lp) and math.isinf(obj.p):
        raise ValueError("max norm has no additive cost; use brute_force_opt")
    if not isinstance(obj, (Lp, TopK)):
        raise ValueError(f"objective {obj!r} not supported")
    s = instance.start
    if n == 1:
        return [s], 0.0
    D = instance.dist
    threshold = n - obj.k if isinstance(obj, TopK) else None

    frontiers: dict[tuple[int, int], list[ParetoLabel]] = {
        (1 << s, s): [ParetoLabel(0.0, 0.0, None, s)]
    }

    def insert(mask: int, last: int, cand: ParetoLabel) -> None:
        # parent handles index into frontier lists, which is safe because a
        # state's list is only rewritten before that state is expanded:
        # children always reference lists that are already frozen
        key = (mask, last)
        labels = frontiers.setdefault(key, [])
        if not prune:
            labels.append(cand)
            return
        cl, cc = _round12(cand.length), _round12(cand.cost)
        keep = []
        for lab in labels:
            ll, lc = _round12(lab.length), _round12(lab.cost)
            if ll <= cl and lc <= cc:
                if ll == cl and lc == cc:
                    # exact tie: keep the lexicographically smaller route
                    old = _route_of(frontiers, (mask, last, labels.index(lab)))
                    new = _route_of(frontiers, cand.parent) + [cand.vertex]
                    if new < old:
                        continue  # drop old, adopt cand
                return  # dominated (or tie lost): drop cand
            if not (cl <= ll and cc <= lc):
                keep.append(lab)
        keep.append(cand)
        frontiers[key] = keep

    masks_by_size: list[list[int]] = [[] for _ in range(n + 1)]
    for mask in range(1 << n):
        if (mask >> s) & 1:
            masks_by_size[bin(mask).count("1")].append(mask)

    for size in range(1, n):
        for mask in masks_by_size[size]:
            for last in range(n):
                labels = frontiers.get((mask, last))
                if not labels:
                    continue
                for idx, lab in enumerate(labels):
                    for u in range(n):
                        if (mask >> u) & 1:
                            continue
                        length = lab.length + D[last, u]
                        if threshold is None:
                            cost = lab.cost + length**obj.p  # type: ignore[union-attr]
                        else:
                            cost = lab.cost + (length if size + 1 > threshold else 0.0)
                        insert(
                            mask | (1 << u),
                            u,
                            ParetoLabel(length, cost, (mask, last, idx), u),
                        )

    full = (1 << n) - 1
    best: tuple[float, list[int]] | None = None
    for last in range(n):
        for idx, lab in enumerate(frontiers.get((full, last), [])):
            route = _route_of(frontiers, (full, last, idx))
            if best is None or lab.cost < best[0] or (lab.cost == best[0] and route < best[1]):
                best = (lab.cost, route)
    assert best is not None
    value = best[0]
    if isinstance(obj, Lp) and obj.p != 1:
        value = value ** (1.0 / obj.p)
    return best[1], float(value)


def k_stroll_lengths(instance: Instance) -> np.ndarray:
    """Minimum length of a path from the start visiting >= k vertices, all k.

    Entry k-1 holds the value for k. One Held-Karp style pass over subsets
    serves the whole sweep; the endpoint is free.
    """
    n = instance.n
    if n > STROLL_MAX_N:
        raise ValueError(f"k-stroll DP guarded at n <= {STROLL_MAX_N}, got {n}")
    s = instance.start
    D = instance.dist
    full = 1 << n
    dp = np.full((full, n), np.inf)
    dp[1 << s, s] = 0.0
    best = np.full(n + 1, np.inf)
    best[1] = 0.0

    masks = sorted((m for m in range(full) if (m >> s) & 1), key=lambda m: bin(m).count("1"))
    for mask in masks:
        row = dp[mask]
        finite = np.isfinite(row)
        if not finite.any():
            continue
        size = bin(mask).count("1")
        m = row[finite].min()
        if m < best[size]:
            best[size] = m
        for u in range(n):
            if (mask >> u) & 1:
                continue
            v = (row + D[:, u]).min()
            nm = mask | (1 << u)
            if v < dp[nm, u]:
                dp[nm, u] = v
    # visiting more vertices never shortens a prefix, but keep the sweep
    # explicitly monotone against float noise
    for k in range(n - 1, 0, -1):
        best[k] = min(best[k], best[k + 1])
    return best[1:]


def exact_k_stroll(instance: Instance, k: int) -> float:
    """Optimal k-stroll length (path from start covering >= k vertices)."""
    if not (1 <= k <= instance.n):
        raise ValueError(f"k must be in 1..{instance.n}, got {k}")
    return float(k_stroll_lengths(instance)[k - 1])
