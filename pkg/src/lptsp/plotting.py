"""Figure rendering for reports: route drawings and gap ratio curves.

Everything renders through matplotlib's Agg backend straight to a file
(format from the extension; .svg and .png both work). Static artifacts only.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .lowerbound import GapCertificate
from .metrics import Euclidean2D, Instance, LineMetric
from .objectives import visit_times


def draw_route(instance: Instance, route: list[int], path: str) -> None:
    """Render a route over its geometry; line and euclidean instances only."""
    spec = instance.spec
    if isinstance(spec, LineMetric):
        xs = np.asarray(spec.coords)
        ys = np.zeros_like(xs)
    elif isinstance(spec, Euclidean2D):
        pts = np.asarray(spec.points)
        xs, ys = pts[:, 0], pts[:, 1]
    else:
        raise ValueError("route drawing requires a line or euclidean instance")

    vt = visit_times(instance, route)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.scatter(xs, ys, s=36, c="tab:blue", zorder=3)
    ax.scatter([xs[instance.start]], [ys[instance.start]], s=120, marker="*",
               c="tab:red", zorder=4, label="start")
    for a, b in zip(route, route[1:]):
        if isinstance(spec, LineMetric):
            # arc between consecutive stops so overlapping hops stay readable
            mid = 0.5 * (xs[a] + xs[b])
            h = 0.12 * abs(xs[b] - xs[a])
            t = np.linspace(0, np.pi, 32)
            ax.plot(mid + 0.5 * (xs[a] - xs[b]) * np.cos(t), h * np.sin(t),
                    lw=0.9, c="gray", zorder=2)
        else:
            ax.annotate("", xy=(xs[b], ys[b]), xytext=(xs[a], ys[a]),
                        arrowprops=dict(arrowstyle="->", lw=0.9, color="gray"))
    for v in route:
        ax.annotate(f"{v}\n@{vt.by_vertex[v]:.3g}", (xs[v], ys[v]),
                    textcoords="offset points", xytext=(4, 4), fontsize=7)
    ax.set_title(f"route of {instance.n} vertices")
    ax.set_aspect("equal" if isinstance(spec, Euclidean2D) else "auto")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def draw_gap_curves(cert: GapCertificate, path: str, max_curves: int = 40) -> None:
    """Per-candidate Top-k ratio curves, the gap attainer highlighted."""
    n = len(cert.per_norm_optima)
    ks = np.arange(1, n + 1)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    idxs = list(range(len(cert.routes)))
    if len(idxs) > max_curves:
        stride = max(1, len(idxs) // max_curves)
        idxs = idxs[::stride]
    if cert.best_index not in idxs:
        idxs.append(cert.best_index)
    for i in idxs:
        curve = cert.ratio_curve(i)
        if i == cert.best_index:
            ax.plot(ks, curve, lw=2.0, c="tab:red", zorder=3,
                    label=f"gap attainer (max ratio {cert.gap:.4f})")
        else:
            ax.plot(ks, curve, lw=0.6, c="gray", alpha=0.5, zorder=2)
    ax.axhline(cert.gap, ls="--", c="tab:red", lw=0.8)
    ax.set_xlabel("k")
    ax.set_ylabel("Top-k sum / per-k optimum")
    ax.set_title(f"candidate ratio curves, gap = {cert.gap:.4f}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
