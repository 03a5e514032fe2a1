import math

import numpy as np
import pytest

from conftest import mixed_instance
from lptsp.exact import (
    brute_force_opt,
    exact_k_stroll,
    k_stroll_lengths,
    pareto_dp_opt,
)
from lptsp.generators import gen_euclidean, gen_figure1
from lptsp.metrics import LineMetric, make_instance
from lptsp.objectives import L1, L2, LINF, Lp, TopK, visit_times

EPS = 0.01
FIG1 = gen_figure1(EPS)


def test_brute_fig1_l2():
    route, value = brute_force_opt(FIG1, L2)
    assert route == [0, 1, 2, 3]  # S A B C
    expected = math.sqrt((1 + EPS) ** 2 + (3 + 2 * EPS) ** 2 + (4 + 2 * EPS) ** 2)
    assert value == pytest.approx(expected, abs=1e-9)


def test_brute_fig1_l1():
    route, value = brute_force_opt(FIG1, L1)
    assert route == [0, 2, 3, 1]  # S B C A
    assert value == pytest.approx(8 + EPS, abs=1e-9)


def test_brute_two_vertices():
    inst = make_instance(0, LineMetric((0.0, 4.0)))
    for obj in (L1, L2, LINF, TopK(1)):
        route, value = brute_force_opt(inst, obj)
        assert route == [0, 1]
        assert value == pytest.approx(4.0)


def test_brute_guard():
    inst = gen_euclidean(12, 0)
    with pytest.raises(ValueError):
        brute_force_opt(inst, L1)


def test_pareto_single_vertex():
    inst = make_instance(0, LineMetric((0.0,)))
    assert pareto_dp_opt(inst, L1) == ([0], 0.0)


def test_pareto_unit_path():
    inst = make_instance(0, LineMetric((0.0, 1.0, 2.0)))
    route, value = pareto_dp_opt(inst, L1)
    assert route == [0, 1, 2]
    assert value == pytest.approx(3.0)


def test_pareto_rejects_max_norm():
    with pytest.raises(ValueError):
        pareto_dp_opt(FIG1, LINF)


def test_pareto_matches_brute_small_suite():
    for idx in range(24):
        inst = mixed_instance(idx, 5 + idx % 3, seed_base=300)
        objectives = [Lp(1), Lp(2), Lp(3)] + [TopK(k) for k in range(1, inst.n + 1)]
        for obj in objectives:
            _, bv = brute_force_opt(inst, obj)
            _, pv = pareto_dp_opt(inst, obj)
            assert pv == pytest.approx(bv, rel=1e-9, abs=1e-9)


def test_pareto_prune_soundness():
    for idx in range(6):
        inst = mixed_instance(idx, 6, seed_base=77)
        for obj in (Lp(2), TopK(3)):
            _, pruned = pareto_dp_opt(inst, obj, prune=True)
            _, full = pareto_dp_opt(inst, obj, prune=False)
            assert pruned == pytest.approx(full, rel=1e-12)


def test_k_stroll_examples():
    assert exact_k_stroll(FIG1, 1) == 0.0
    line = make_instance(0, LineMetric((0.0, 1.0, 2.0)))
    assert exact_k_stroll(line, 3) == pytest.approx(2.0)
    # go right to B then C beats collecting A first
    assert exact_k_stroll(FIG1, 3) == pytest.approx(2.0)


def test_k_stroll_against_subset_bruteforce():
    import itertools

    rng = np.random.default_rng(11)
    for _ in range(10):
        n = int(rng.integers(3, 8))
        inst = gen_euclidean(n, int(rng.integers(0, 1000)))
        lengths = k_stroll_lengths(inst)
        for k in range(1, n + 1):
            best = math.inf
            others = [v for v in range(n) if v != inst.start]
            for subset in itertools.combinations(others, k - 1):
                for perm in itertools.permutations(subset):
                    t, prev = 0.0, inst.start
                    for v in perm:
                        t += inst.d(prev, v)
                        prev = v
                    best = min(best, t)
            assert lengths[k - 1] == pytest.approx(best, rel=1e-9)


def test_k_stroll_monotone_and_full_equals_linf():
    for idx in range(9):
        inst = mixed_instance(idx, 7, seed_base=40)
        lengths = k_stroll_lengths(inst)
        assert np.all(np.diff(lengths) >= -1e-12)
        _, linf = brute_force_opt(inst, LINF)
        assert lengths[-1] == pytest.approx(linf, rel=1e-9)


def test_k_stroll_bounds_every_route_topk(rng):
    inst = gen_euclidean(7, 99)
    lengths = k_stroll_lengths(inst)
    for _ in range(20):
        route = [0] + [int(v) for v in rng.permutation(range(1, 7))]
        T = visit_times(inst, route).sorted
        assert np.all(T >= lengths - 1e-12)


def test_k_stroll_guards():
    inst = gen_euclidean(5, 1)
    with pytest.raises(ValueError):
        exact_k_stroll(inst, 0)
    with pytest.raises(ValueError):
        exact_k_stroll(inst, 6)
