"""Metric construction and validation.

A problem instance is a vertex set {0..n-1}, a start vertex, and a symmetric
metric given either explicitly (dense matrix) or through a geometry (points on
a line, points in the plane, or a weighted spanning tree). All solvers consume
the materialized dense table.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

# Relative tolerance for every metric comparison in this package.
REL_TOL = 1e-9


class MetricError(ValueError):
    """Raised for structurally invalid metric specifications."""


@dataclass(frozen=True)
class LineMetric:
    """Vertices on the real line; distances are absolute differences."""

    coords: tuple[float, ...]


@dataclass(frozen=True)
class Euclidean2D:
    """Vertices in the plane; distances are Euclidean."""

    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class WeightedTree:
    """Spanning tree metric: distance is the weight of the unique path."""

    n: int
    edges: tuple[tuple[int, int, float], ...]


@dataclass(frozen=True)
class ExplicitMatrix:
    """Dense nonnegative distance table, validated on construction."""

    matrix: tuple[tuple[float, ...], ...]


MetricSpec = Union[LineMetric, Euclidean2D, WeightedTree, ExplicitMatrix]


@dataclass(frozen=True)
class MetricViolation:
    """A concrete witness that a table fails one metric axiom.

    kind is one of "symmetry", "identity", "triangle", "connectivity";
    witness is the offending vertex tuple and magnitude the excess beyond
    tolerance.
    """

    kind: str
    witness: tuple[int, ...]
    magnitude: float


def _tree_distances(spec: WeightedTree) -> np.ndarray:
    n = spec.n
    if n < 1:
        raise MetricError("tree must span at least one vertex")
    if len(spec.edges) != n - 1:
        raise MetricError(
            f"tree on {n} vertices needs {n - 1} edges, got {len(spec.edges)}"
        )
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for u, v, w in spec.edges:
        if not (0 <= u < n and 0 <= v < n):
            raise MetricError(f"edge ({u},{v}) out of range")
        if not math.isfinite(w) or w < 0:
            raise MetricError(f"edge ({u},{v}) has invalid weight {w}")
        adj[u].append((v, float(w)))
        adj[v].append((u, float(w)))
    dist = np.full((n, n), np.inf)
    for src in range(n):
        dist[src, src] = 0.0
        stack = [src]
        seen = {src}
        while stack:
            x = stack.pop()
            for y, w in adj[x]:
                if y not in seen:
                    seen.add(y)
                    dist[src, y] = dist[src, x] + w
                    stack.append(y)
        if len(seen) != n:
            raise MetricError("tree edge list is disconnected (or cyclic)")
    return dist


def build_metric(spec: MetricSpec) -> np.ndarray:
    """Materialize the dense n-by-n distance table for a metric spec.

    The returned table satisfies symmetry, identity, and the triangle
    inequality within REL_TOL. Raises MetricError for malformed input
    (non-finite coordinates, bad tree structure, or an explicit table that
    violates the axioms).
    """
    if isinstance(spec, LineMetric):
        c = np.asarray(spec.coords, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise MetricError("line metric needs at least one coordinate")
        if not np.isfinite(c).all():
            raise MetricError("non-finite line coordinate")
        return np.abs(c[:, None] - c[None, :])
    if isinstance(spec, Euclidean2D):
        p = np.asarray(spec.points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 1:
            raise MetricError("euclidean metric needs (x, y) points")
        if not np.isfinite(p).all():
            raise MetricError("non-finite point coordinate")
        diff = p[:, None, :] - p[None, :, :]
        return np.sqrt((diff**2).sum(axis=-1))
    if isinstance(spec, WeightedTree):
        return _tree_distances(spec)
    if isinstance(spec, ExplicitMatrix):
        m = np.asarray(spec.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise MetricError("explicit metric must be a square matrix")
        if not np.isfinite(m).all():
            raise MetricError("non-finite matrix entry")
        if (m < 0).any():
            raise MetricError("negative distance in explicit matrix")
        violations = validate_metric(m)
        if violations:
            v = violations[0]
            raise MetricError(
                f"explicit matrix violates {v.kind} at {v.witness} "
                f"by {v.magnitude:g} ({len(violations)} violations total)"
            )
        return m
    raise MetricError(f"unknown metric spec {type(spec).__name__}")


def validate_metric(table: np.ndarray, tol: float = REL_TOL) -> list[MetricViolation]:
    """Check a dense table against the metric axioms.

    Returns an empty list iff symmetry, identity, and the triangle inequality
    hold within relative tolerance; otherwise one MetricViolation per failure,
    each carrying a concrete witness. Violations are data, not errors.
    """
    d = np.asarray(table, dtype=float)
    n = d.shape[0]
    out: list[MetricViolation] = []
    scale = np.maximum(1.0, np.abs(d))

    asym = np.abs(d - d.T)
    for i, j in zip(*np.nonzero(asym > tol * np.maximum(scale, scale.T))):
        if i < j:
            out.append(MetricViolation("symmetry", (int(i), int(j)), float(asym[i, j])))

    diag = np.abs(np.diag(d))
    for (i,) in zip(*np.nonzero(diag > tol)):
        out.append(MetricViolation("identity", (int(i),), float(diag[i])))

    for z in range(n):
        excess = d - (d[:, z][:, None] + d[z, :][None, :])
        bad = excess > tol * scale
        bad[z, :] = False
        bad[:, z] = False
        for i, j in zip(*np.nonzero(bad)):
            out.append(
                MetricViolation("triangle", (int(i), int(j), int(z)), float(excess[i, j]))
            )
    return out


@dataclass(frozen=True, eq=False)
class Instance:
    """A routing instance: start vertex plus a dense metric table.

    The original geometry spec, when known, is kept for serialization and
    drawing. Instances are immutable; every operation in this package is a
    pure function over them.
    """

    start: int
    dist: np.ndarray
    spec: MetricSpec | None = None

    def __post_init__(self) -> None:
        n = self.dist.shape[0]
        if not (0 <= self.start < n):
            raise MetricError(f"start {self.start} out of range for n={n}")

    @property
    def n(self) -> int:
        return int(self.dist.shape[0])

    def d(self, u: int, v: int) -> float:
        return float(self.dist[u, v])


def make_instance(start: int, spec: MetricSpec) -> Instance:
    return Instance(start=start, dist=build_metric(spec), spec=spec)


_PAYLOAD_KEY = {"line": "coords", "euclidean": "points", "tree": "edges", "explicit": "matrix"}


def spec_to_obj(spec: MetricSpec) -> dict:
    if isinstance(spec, LineMetric):
        return {"type": "line", "coords": list(spec.coords)}
    if isinstance(spec, Euclidean2D):
        return {"type": "euclidean", "points": [list(p) for p in spec.points]}
    if isinstance(spec, WeightedTree):
        return {"type": "tree", "edges": [[u, v, w] for u, v, w in spec.edges]}
    if isinstance(spec, ExplicitMatrix):
        return {"type": "explicit", "matrix": [list(r) for r in spec.matrix]}
    raise MetricError(f"unknown metric spec {type(spec).__name__}")


def obj_to_spec(obj: dict) -> MetricSpec:
    kind = obj.get("type")
    if kind not in _PAYLOAD_KEY:
        raise MetricError(f"unknown metric type {kind!r}")
    key = _PAYLOAD_KEY[kind]
    if key not in obj:
        raise MetricError(f"metric type {kind!r} requires field {key!r}")
    payload = obj[key]
    if kind == "line":
        return LineMetric(tuple(float(x) for x in payload))
    if kind == "euclidean":
        return Euclidean2D(tuple((float(x), float(y)) for x, y in payload))
    if kind == "tree":
        edges = tuple((int(u), int(v), float(w)) for u, v, w in payload)
        n = len(edges) + 1
        return WeightedTree(n, edges)
    return ExplicitMatrix(tuple(tuple(float(x) for x in row) for row in payload))


def instance_to_obj(inst: Instance) -> dict:
    spec = inst.spec
    if spec is None:
        spec = ExplicitMatrix(tuple(tuple(float(x) for x in row) for row in inst.dist))
    return {"start": int(inst.start), "metric": spec_to_obj(spec)}


def parse_instance(obj: dict) -> Instance:
    if not isinstance(obj, dict) or "start" not in obj or "metric" not in obj:
        raise MetricError('instance JSON requires "start" and "metric" fields')
    return make_instance(int(obj["start"]), obj_to_spec(obj["metric"]))


def instance_to_json(inst: Instance, indent: int | None = 2) -> str:
    return json.dumps(instance_to_obj(inst), indent=indent, sort_keys=True)


def load_instance(path: str) -> Instance:
    with open(path) as fh:
        return parse_instance(json.load(fh))


def instance_digest(inst: Instance) -> str:
    """Stable content hash of the canonical instance JSON."""
    canon = json.dumps(instance_to_obj(inst), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()
