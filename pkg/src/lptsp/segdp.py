"""Reduction of p-norm routing to segmented-TSP decisions.

Segmented-TSP asks whether a route from the start visits at least n_i
distinct vertices by each deadline t_i. The reduction builds geometric budget
levels lambda_i = (1+eps)^{-j} * c^i with c = (1+eps)^k, and fills a table
D[level][count] with upper bounds on the accumulated p-th powers of visit
times, querying the decision oracle for each way of splitting the newly
covered vertices across (1+eps)-spaced sub-deadlines inside a level. Vertices
assigned to a level are charged as if their subtour started after a waiting
period of three previous-level budgets, which is exactly realizable by
chaining oracle witnesses, so the reported value always upper-bounds the
returned route's true norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .metrics import ExplicitMatrix, Instance
from .objectives import check_route, visit_times

Oracle = Callable[[Instance, "SegmentedSpec"], Optional[list[int]]]

SEGMENTED_MAX_N = 15


class OracleInconsistencyError(RuntimeError):
    """The decision oracle contradicted a route known to satisfy a spec."""


@dataclass(frozen=True)
class SegmentedSpec:
    """Paired nondecreasing counts and deadlines: visit >= counts[i] distinct
    vertices by time deadlines[i], starting at the start vertex."""

    counts: tuple[int, ...]
    deadlines: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.counts) != len(self.deadlines) or not self.counts:
            raise ValueError("counts and deadlines must be equal-length and nonempty")
        if any(b < a for a, b in zip(self.counts, self.counts[1:])):
            raise ValueError("counts must be nondecreasing")
        if any(b < a for a, b in zip(self.deadlines, self.deadlines[1:])):
            raise ValueError("deadlines must be nondecreasing")
        if any(t < 0 for t in self.deadlines) or self.counts[0] < 1:
            raise ValueError("deadlines must be >= 0 and counts >= 1")


@dataclass(frozen=True)
class ReductionConfig:
    """Reduction knobs: precision eps, segments per level k, phase offset j,
    and the oracle's approximation factor alpha. The level ratio
    c = (1+eps)^k must be at least 3 so consecutive subtours chain."""

    epsilon: float
    k: int
    j: int = 0
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not (0 <= self.j < self.k):
            raise ValueError(f"j must be in 0..{self.k - 1}")
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        if self.c < 3:
            raise ValueError(f"(1+eps)^k = {self.c:g} < 3; increase k or eps")

    @property
    def c(self) -> float:
        return (1 + self.epsilon) ** self.k


def quantize_distances(instance: Instance, epsilon: float) -> tuple[Instance, float]:
    """Scale distances by an integer factor and round to integers.

    The factor K = ceil(n^2 / (eps * d_min)) keeps every per-edge rounding
    error below eps*d_min/(2 n^2), so every visit time of every route (and
    hence any norm) is preserved within a (1 +- eps) factor after dividing by
    the returned scale. An all-zero metric passes through with scale 1.
    Already-integral small inputs come back unchanged up to the uniform
    factor.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    D = instance.dist
    pos = D[D > 0]
    if pos.size == 0:
        return instance, 1.0
    dmin = float(pos.min())
    n = instance.n
    scale = float(math.ceil(n * n / (epsilon * dmin)))
    q = np.rint(D * scale)
    q = np.maximum(q, q.T)  # rounding is symmetric already; keep it explicit
    np.fill_diagonal(q, 0.0)
    spec = ExplicitMatrix(tuple(tuple(float(x) for x in row) for row in q))
    return Instance(start=instance.start, dist=q, spec=spec), scale


def _deadline_by_count(spec: SegmentedSpec, n: int) -> np.ndarray:
    """deadline[m] = earliest deadline binding the m-th distinct visit."""
    out = np.full(n + 1, np.inf)
    for cnt, t in zip(spec.counts, spec.deadlines):
        if cnt > n:
            raise ValueError(f"spec count {cnt} exceeds n={n}")
        out[cnt] = min(out[cnt], t)
    return out


def route_satisfies(instance: Instance, route: Sequence[int], spec: SegmentedSpec,
                    speed: float = 1.0) -> bool:
    """Does the route meet every (count, deadline) pair at the given speed?"""
    vt = visit_times(instance, route)
    T = vt.sorted
    for cnt, t in zip(spec.counts, spec.deadlines):
        if T[cnt - 1] > speed * t * (1 + 1e-12) + 1e-15:
            return False
    return True


def segmented_bruteforce(instance: Instance, spec: SegmentedSpec) -> Optional[list[int]]:
    """Exact segmented-TSP decision by subset DP; witness route or None.

    States are (visited set, last vertex) with minimum path length; a
    transition into set size m is admitted only when the arrival time meets
    every deadline with count m. A feasible prefix is completed to a full
    permutation by appending the unvisited vertices in index order.
    """
    n, s = instance.n, instance.start
    if n > SEGMENTED_MAX_N:
        raise ValueError(f"segmented DP guarded at n <= {SEGMENTED_MAX_N}, got {n}")
    deadline = _deadline_by_count(spec, n)
    if deadline[1] < 0:
        return None
    target = spec.counts[-1]
    D = instance.dist
    full = 1 << n
    dp = np.full((full, n), np.inf)
    pred = np.full((full, n), -1, dtype=np.int64)
    dp[1 << s, s] = 0.0

    masks = sorted((m for m in range(full) if (m >> s) & 1), key=lambda m: bin(m).count("1"))
    goal: Optional[tuple[int, int]] = None
    for mask in masks:
        size = bin(mask).count("1")
        row = dp[mask]
        if not np.isfinite(row).any():
            continue
        if size >= target:
            if goal is None:
                goal = (mask, int(np.argmin(row)))
            continue  # longer prefixes cannot help once the target count is hit
        cap = deadline[size + 1]
        for u in range(n):
            if (mask >> u) & 1:
                continue
            cand = row + D[:, u]
            v = int(np.argmin(cand))
            val = cand[v]
            if val <= cap + 1e-15 and val < dp[mask | (1 << u), u]:
                dp[mask | (1 << u), u] = val
                pred[mask | (1 << u), u] = v
    if goal is None:
        return None
    mask, last = goal
    prefix = []
    while last != -1:
        prefix.append(last)
        p = int(pred[mask, last])
        mask ^= 1 << last
        last = p
    prefix.reverse()
    rest = [v for v in range(n) if v not in set(prefix)]
    return prefix + rest


@dataclass
class _OracleGuard:
    """Wraps an oracle with witness validation and an infeasibility cross-check."""

    instance: Instance
    oracle: Oracle
    alpha: float
    calls: int = 0
    cache: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)

    def ask(self, spec: SegmentedSpec) -> Optional[list[int]]:
        key = (spec.counts, spec.deadlines)
        if key in self.cache:
            return self.cache[key]
        self.calls += 1
        ans = self.oracle(self.instance, spec)
        if ans is not None:
            check_route(self.instance, ans)
            if not route_satisfies(self.instance, ans, spec, speed=self.alpha):
                raise OracleInconsistencyError(
                    f"oracle witness misses its deadlines (alpha={self.alpha}) for {spec}"
                )
            self.witnesses.append(list(ans))
        else:
            for w in self.witnesses:
                if route_satisfies(self.instance, w, spec):
                    raise OracleInconsistencyError(
                        f"oracle claims {spec} infeasible but a known route satisfies it: {w}"
                    )
        self.cache[key] = ans
        return ans


@dataclass(frozen=True, eq=False)
class ReductionResult:
    route: list[int]
    value: float
    j: int
    oracle_calls: int
    trace: dict


def _compositions(total: int, parts: int):
    """Ordered nonnegative integer splits of `total` into `parts` parts."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def lp_via_segmented(
    instance: Instance,
    p: float,
    config: ReductionConfig,
    oracle: Oracle = segmented_bruteforce,
) -> ReductionResult:
    """Approximate the p-norm optimum through segmented-TSP decisions.

    Enumerates every phase offset j, fills the level/count table for each,
    and keeps the best. The reported value is alpha * D[last][n]^(1/p), an
    upper bound on the true norm of the reconstructed route: level i's
    witness is queried with in-level deadlines lambda_i (1+eps)^(r-k) (so its
    needed prefix is no longer than lambda_i and subtours chain within the
    3*lambda budget), while the charge per vertex keeps the waiting offset
    3*lambda_{i-1} in front. With k >= (3p)^p (1+eps)/eps^2 the value is
    within alpha*(1+eps) of optimal.
    """
    if not (p >= 1 and math.isfinite(p)):
        raise ValueError(f"p must be finite and >= 1, got {p}")
    n, s = instance.n, instance.start
    zero_block = [s] + [v for v in range(n) if v != s and instance.dist[s, v] == 0]
    d0 = len(zero_block)
    if d0 == n:
        return ReductionResult(list(zero_block), 0.0, 0, 0, {"levels": []})

    from_s = instance.dist[s]
    dmin_s = float(from_s[from_s > 0].min())
    lmax = (n - 1) * float(instance.dist.max())
    k, eps, c = config.k, config.epsilon, config.c

    best: Optional[ReductionResult] = None
    for j in range(k):
        def lam(i: int) -> float:
            return (1 + eps) ** (-j) * c**i

        # largest base level strictly below the nearest non-trivial distance
        i_base = math.floor((math.log(dmin_s) + j * math.log(1 + eps)) / math.log(c))
        while lam(i_base) >= dmin_s:
            i_base -= 1
        n_levels = 1
        while lam(i_base + n_levels - 1) < lmax:
            n_levels += 1
            if n_levels > 10_000:
                raise RuntimeError("budget ladder failed to reach the length bound")
        n_levels += 1  # one level past the bound so all n vertices fit

        guard = _OracleGuard(instance, oracle, config.alpha)
        INF = math.inf
        D_tab = [dict() for _ in range(n_levels)]
        parent: list[dict] = [dict() for _ in range(n_levels)]
        D_tab[0][d0] = 0.0
        trace_levels = []

        for li in range(1, n_levels):
            i = i_base + li
            lam_prev, lam_i = lam(i - 1), lam(i)
            sub_deadlines = [lam_i * (1 + eps) ** (r - k) for r in range(1, k + 1)]
            charges = [(3 * lam_prev + t) ** p for t in sub_deadlines]
            level_trace = {"i": i, "lambda": lam_i, "chosen": {}}
            for dprev, base_cost in D_tab[li - 1].items():
                for m in _compositions_upto(n - dprev, k):
                    total = sum(m)
                    d_new = dprev + total
                    cost = base_cost + sum(mr * ch for mr, ch in zip(m, charges))
                    if cost >= D_tab[li].get(d_new, INF):
                        continue
                    counts = [dprev]
                    deadlines = [lam_prev]
                    run = dprev
                    for mr, t in zip(m, sub_deadlines):
                        if mr:
                            run += mr
                            counts.append(run)
                            deadlines.append(t)
                    witness = guard.ask(SegmentedSpec(tuple(counts), tuple(deadlines)))
                    if witness is None:
                        continue
                    D_tab[li][d_new] = cost
                    parent[li][d_new] = (dprev, m, witness, deadlines[-1])
            for d_new, cost in D_tab[li].items():
                if d_new in parent[li]:
                    dprev, m, _, _ = parent[li][d_new]
                    level_trace["chosen"][d_new] = {"from": dprev, "split": list(m), "cost": cost}
            trace_levels.append(level_trace)
            if n in D_tab[li] and lam(i - 1) >= lmax:
                break

        last_li = max(li for li in range(n_levels) if n in D_tab[li])
        route = _assemble_route(instance, zero_block, parent, last_li, d0)
        value = config.alpha * D_tab[last_li][n] ** (1.0 / p)
        res = ReductionResult(
            route, float(value), j, guard.calls,
            {"levels": trace_levels, "oracle_calls": guard.calls},
        )
        if best is None or res.value < best.value:
            best = res
    assert best is not None
    return best


def _compositions_upto(budget: int, parts: int):
    """All ordered splits with total 0..budget (total 0 = carry the count over)."""
    for total in range(budget + 1):
        yield from _compositions(total, parts)


def _assemble_route(
    instance: Instance,
    zero_block: list[int],
    parent: list[dict],
    last_li: int,
    d0: int,
) -> list[int]:
    """Chain witness prefixes level by level, short-cutting revisits.

    A level's subtour drives its witness up to the witness's own target
    count, so exactly that prefix (the first `count` distinct vertices) is
    what the physical schedule covers; anything already seen is skipped.
    """
    steps = []
    d = instance.n
    for li in range(last_li, 0, -1):
        dprev, m, witness, _ = parent[li][d]
        if sum(m) > 0:
            steps.append((witness, d))
        d = dprev
    assert d == d0, "reduction backtrace did not reach the base count"
    steps.reverse()

    seen = set(zero_block)
    order = list(zero_block)
    for witness, count in steps:
        prefix: list[int] = []
        distinct: set[int] = set()
        for v in witness:
            if v not in distinct:
                distinct.add(v)
                prefix.append(v)
            if len(distinct) >= count:
                break
        for v in prefix:
            if v not in seen:
                seen.add(v)
                order.append(v)
    for v in range(instance.n):
        if v not in seen:
            order.append(v)
    check_route(instance, order)
    return order


def waiting_tour_cost(
    instance: Instance, route: Sequence[int], p: float, config: ReductionConfig
) -> float:
    """Accumulated p-th powers of the waiting-augmented tour built on `route`.

    The tour re-traverses the route's maximal prefixes of length at most
    lambda_i = (1+eps)^{-j} c^i, returning to the origin and idling until
    3*lambda_i before the next prefix. The first subtour (level 0) starts at
    time zero, so vertices reached within lambda_0 keep their plain visit
    time; a vertex first reached at t in a later level i is served at
    t + 3*lambda_{i-1}. Zero-time vertices sit at the start and cost nothing.
    Averaged over the phase offset j this is within (1+eps) of the plain cost
    once k >= (3p)^p (1+eps)/eps^2.
    """
    vt = visit_times(instance, route)
    eps, k, j = config.epsilon, config.k, config.j
    c = config.c
    log_c = math.log(c)
    total = 0.0
    for t in vt.sorted:
        if t <= 0:
            continue
        x = (math.log(t) + j * math.log(1 + eps)) / log_c
        i = math.ceil(x - 1e-12)
        wait = 0.0 if i <= 0 else 3 * (1 + eps) ** (-j) * c ** (i - 1)
        total += (t + wait) ** p
    return float(total)
