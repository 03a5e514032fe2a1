"""Minkowski-norm TSP toolkit.

Exact solvers, the all-norm 8-approximation, randomized and derandomized
squared-delay routing, the segmented-TSP reduction, and line-metric
inapproximability certificates.
"""

from .cover import (
    allnorm_approx,
    dfs_traversal,
    geometric_cover,
    tfp_approx,
    tfp_constant,
    tfp_derandomized,
)
from .exact import brute_force_opt, exact_k_stroll, k_stroll_lengths, pareto_dp_opt
from .ktree import GoodKTree, good_k_tree_exact, good_k_tree_pd, good_k_tree_sweep, pcst_primal_dual
from .lowerbound import (
    LineInstance,
    allnorm_gap,
    appendix_instance,
    circle_ratio_demo,
    enumerate_line_routes,
    exponential_family_ratios,
)
from .metrics import (
    Euclidean2D,
    ExplicitMatrix,
    Instance,
    LineMetric,
    MetricViolation,
    WeightedTree,
    build_metric,
    load_instance,
    make_instance,
    parse_instance,
    validate_metric,
)
from .objectives import (
    L1,
    L2,
    LINF,
    Lp,
    TopK,
    VisitTimes,
    norm,
    parse_norm,
    submajorization_factor,
    topk_sums,
    visit_times,
)
from .segdp import (
    ReductionConfig,
    SegmentedSpec,
    lp_via_segmented,
    quantize_distances,
    segmented_bruteforce,
    waiting_tour_cost,
)

__version__ = "0.1.0"
