"""Inapproximability certificates for all-norm routing on line metrics.

On a line, the candidate optimal routes are the interval routes: after every
step the visited set is a contiguous block of coordinates containing the
start, and within one sweep direction points are collected in passing order.
Evaluating every candidate's Top-k sums against the per-k optima gives the
min-max ratio that no single route can beat simultaneously for all monotone
symmetric norms (Ky Fan dominance makes the Top-k family complete for this).
The embedded 150-point instance certifies a gap of 1.78.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .metrics import Instance, LineMetric, make_instance
from .objectives import topk_sums, visit_times

CANDIDATE_CAP = 1_000_000

# Verbatim coordinate multiset of the published 150-point certificate
# (traveler starts at x = 200; note the block of eleven copies of 316).
APPENDIX_COORDS = (
    0, 200, 202, 204, 206, 208, 210, 212, 214, 216, 217, 218, 219, 220, 221,
    222, 223, 224, 225, 226, 228, 230, 232, 234, 236, 238, 240, 242, 244, 246,
    250, 254, 258, 262, 266, 270, 274, 278, 282, 286, 289, 292, 295, 298, 301,
    304, 307, 310, 313, 316, 316, 316, 316, 316, 316, 316, 316, 316, 316, 316,
    322, 328, 334, 340, 346, 352, 358, 364, 370, 376, 382, 388, 394, 400, 406,
    412, 418, 424, 430, 436, 446, 456, 466, 476, 486, 496, 506, 516, 526, 536,
    540, 544, 548, 552, 556, 560, 564, 568, 572, 576, 595, 614, 633, 652, 671,
    690, 709, 728, 747, 766, 775, 784, 793, 802, 811, 820, 829, 838, 847, 856,
    888, 920, 952, 984, 1016, 1048, 1080, 1112, 1144, 1176, 1199, 1222, 1245,
    1268, 1291, 1314, 1337, 1360, 1383, 1406, 1519, 1632, 1745, 1858, 1971,
    2084, 2197, 2310, 2423, 2536,
)
APPENDIX_START = 200.0


@dataclass(frozen=True)
class LineInstance:
    """A multiset of line coordinates plus the start coordinate."""

    coords: tuple[float, ...]
    start: float

    def __post_init__(self) -> None:
        if self.start not in self.coords:
            raise ValueError("start coordinate must appear among coords")

    @property
    def n(self) -> int:
        return len(self.coords)

    def to_instance(self) -> Instance:
        start_idx = self.coords.index(self.start)
        return make_instance(start_idx, LineMetric(self.coords))


def appendix_instance() -> LineInstance:
    """The published 150-point line certificate, start at 200."""
    return LineInstance(tuple(float(x) for x in APPENDIX_COORDS), APPENDIX_START)


def enumerate_line_routes(line: LineInstance, cap: int = CANDIDATE_CAP) -> list[list[int]]:
    """All interval routes of a line instance, as vertex-index orders.

    A route is determined by the order in which the left/right frontier is
    extended between distinct coordinates; coincident points are collected
    simultaneously (ascending index) the moment the traveler stands on them.
    Raises if the candidate count would exceed `cap`.
    """
    coords = line.coords
    start = line.start
    by_coord: dict[float, list[int]] = defaultdict(list)
    for i, c in enumerate(coords):
        by_coord[c].append(i)
    start_idx = coords.index(start)
    start_block = [start_idx] + [i for i in by_coord[start] if i != start_idx]

    lefts = sorted({c for c in coords if c < start}, reverse=True)  # nearest first
    rights = sorted({c for c in coords if c > start})
    L, R = len(lefts), len(rights)
    if math.comb(L + R, L) > cap:
        raise ValueError(f"candidate count {math.comb(L + R, L)} exceeds cap {cap}")

    routes = []
    for left_slots in itertools.combinations(range(L + R), L):
        slots = set(left_slots)
        order = list(start_block)
        li = ri = 0
        for step in range(L + R):
            if step in slots:
                order.extend(by_coord[lefts[li]])
                li += 1
            else:
                order.extend(by_coord[rights[ri]])
                ri += 1
        routes.append(order)
    return routes


@dataclass(frozen=True, eq=False)
class GapCertificate:
    """Candidate-restricted all-norm gap of a line instance.

    per_norm_optima[k-1] is the minimum Top-k sum over candidates; gap is the
    min over candidates of the max over k of the candidate's Top-k sum versus
    that optimum (0/0 counts as 1). best_index points at the gap-attaining
    candidate; topk_table holds every candidate's Top-k sums row by row.
    """

    instance: LineInstance
    routes: tuple[tuple[int, ...], ...]
    per_norm_optima: np.ndarray
    gap: float
    best_index: int
    topk_table: np.ndarray

    def ratio_curve(self, idx: int) -> np.ndarray:
        """Per-k ratios of candidate idx against the per-k optima."""
        return _safe_ratios(self.topk_table[idx], self.per_norm_optima)


def _safe_ratios(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.empty_like(num)
    for i, (a, b) in enumerate(zip(num, den)):
        if b > 0:
            out[i] = a / b
        else:
            out[i] = 1.0 if a == 0 else math.inf
    return out


def allnorm_gap(line: LineInstance, cap: int = CANDIDATE_CAP) -> GapCertificate:
    """Evaluate the interval-route min-max Top-k gap of a line instance."""
    inst = line.to_instance()
    routes = enumerate_line_routes(line, cap)
    sums = np.stack([topk_sums(visit_times(inst, r)) for r in routes])
    optima = sums.min(axis=0)
    worst = np.array([_safe_ratios(row, optima).max() for row in sums])
    best = int(np.argmin(worst))
    return GapCertificate(
        instance=line,
        routes=tuple(tuple(r) for r in routes),
        per_norm_optima=optima,
        gap=float(worst[best]),
        best_index=best,
        topk_table=sums,
    )


def exponential_family_ratios(n: int, epsilon: float) -> tuple[float, float]:
    """The two closed-form ratios of the exponential line family, as printed.

    Instance: start 0, one point at -1, and points at b^i - 1 for i = 1..n
    with b = 1 + epsilon. First value: max-norm ratio of the go-right-first
    route, (2b^n - 1)/(b^n + 1), which tends to 2. Second: the displayed
    sum-norm ratio of the go-left-first route. At n = 2100, eps = 1e-3 the
    smaller of the two is at least 1.67.
    """
    b = 1.0 + epsilon
    bn = b**n
    linf = (2 * bn - 1) / (bn + 1)
    l1 = (1 + 2 * n + b ** (n + 1) / (b - 1) - n - 1) / (
        b ** (n + 1) / (b - 1) - n - 1 + 2 * bn - 1
    )
    return float(linf), float(l1)


def exponential_line_instance(n: int, epsilon: float) -> LineInstance:
    """Materialized exponential family instance (small n only)."""
    b = 1.0 + epsilon
    coords = (0.0, -1.0) + tuple(b**i - 1 for i in range(1, n + 1))
    return LineInstance(coords, 0.0)


def circle_ratio_demo(n: int, m: int, epsilon: float = 0.5) -> tuple[float, float]:
    """Normalized squared-delay of the two perimeter routes on the circle.

    Unit-circle instance: start at angle 0, single points at angles 2*pi*k/n
    for k = 1..n-2, and a cluster of m coincident points at angle
    2*pi*(n-1-epsilon)/n (held as a weight, not materialized). Returns
    (wrong_direction, right_direction) values of ||l||_2^2 / m. Walking away
    from the cluster first tends to 4*pi^2; walking toward it tends to 0.
    """
    if n < 3 or m < 1:
        raise ValueError("need n >= 3 and m >= 1")
    angles = [2 * math.pi * k / n for k in range(n - 1)]  # k = 0 is the start
    cluster = 2 * math.pi * (n - 1 - epsilon) / n

    def chord2(a: float, b: float) -> float:
        d = abs(a - b) % (2 * math.pi)
        d = min(d, 2 * math.pi - d)
        return 2 * math.sin(d / 2)

    # wrong: ascend through the singles, reach the cluster last
    t = 0.0
    wrong = 0.0
    for prev, cur in zip(angles, angles[1:]):
        t += chord2(prev, cur)
        wrong += t * t
    t += chord2(angles[-1], cluster)
    wrong += m * t * t

    # right: hit the cluster immediately, then descend through the singles
    t = chord2(0.0, cluster)
    right = m * t * t
    t += chord2(cluster, angles[-1])
    right += t * t
    for prev, cur in zip(angles[:0:-1], angles[-2:0:-1]):
        t += chord2(prev, cur)
        right += t * t

    return wrong / m, right / m
