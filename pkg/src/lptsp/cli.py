"""Command-line front end: instance I/O, solver dispatch, report emission.

Reports go to stdout as JSON unless --out is given; --csv adds the Top-k
sweep as a delimited table and --svg renders the matching figure next to it.
Exit codes: 0 success, 1 infeasible input or failed validation, 2 usage
error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import exact, plotting
from .cover import allnorm_approx, tfp_approx, tfp_derandomized
from .generators import KINDS, generate
from .lowerbound import LineInstance, allnorm_gap, appendix_instance
from .metrics import (
    ExplicitMatrix,
    Instance,
    LineMetric,
    MetricError,
    instance_digest,
    instance_to_json,
    parse_instance,
    validate_metric,
)
from .objectives import (
    L1,
    L2,
    LINF,
    Lp,
    RouteError,
    TopK,
    norm,
    norm_label,
    parse_norm,
    topk_sums,
    visit_times,
)
from .segdp import ReductionConfig, lp_via_segmented, segmented_bruteforce

STROLL_BOUND_MAX_N = 15


class UsageError(ValueError):
    pass


@dataclass
class RunReport:
    """Self-verifying result record: every norm recomputes from the route."""

    digest: str
    algorithm: dict
    route: list[int]
    norms: dict
    topk: list[float]
    wall_time_s: float

    def to_obj(self) -> dict:
        return {
            "instance": self.digest,
            "algorithm": self.algorithm,
            "route": self.route,
            "norms": self.norms,
            "topk": self.topk,
            "wall_time_s": self.wall_time_s,
        }


def build_report(inst: Instance, route: list[int], algorithm: dict, t0: float) -> RunReport:
    vt = visit_times(inst, route)
    return RunReport(
        digest=instance_digest(inst),
        algorithm=algorithm,
        route=list(route),
        norms={
            "l1": norm(vt, L1),
            "l2": norm(vt, L2),
            "linf": norm(vt, LINF),
        },
        topk=[float(x) for x in topk_sums(vt)],
        wall_time_s=time.perf_counter() - t0,
    )


def _read_instance(path: str | None) -> Instance:
    if path in (None, "-"):
        return parse_instance(json.load(sys.stdin))
    with open(path) as fh:
        return parse_instance(json.load(fh))


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_topk_csv(path: str, inst: Instance, route: list[int]) -> None:
    vt = visit_times(inst, route)
    alg = vt.sorted
    lower = exact.k_stroll_lengths(inst) if inst.n <= STROLL_BOUND_MAX_N else None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "t_k_alg", "t_k_lowerbound"])
        for i in range(inst.n):
            w.writerow([i + 1, alg[i], "" if lower is None else lower[i]])


def _route_figure(args, inst: Instance, route: list[int]) -> None:
    if args.svg:
        plotting.draw_route(inst, route, args.svg)


def cmd_gen(args) -> int:
    inst = generate(args.kind, n=args.n, seed=args.seed, epsilon=args.eps, m=args.m)
    text = instance_to_json(inst)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    obj = parse_norm(args.norm)
    inst = _read_instance(args.instance)
    method = args.method
    if method == "auto":
        can_dp = isinstance(obj, TopK) or (isinstance(obj, Lp) and math.isfinite(obj.p))
        method = "pareto" if (can_dp and inst.n > exact.BRUTE_MAX_N) else "brute"
    if method == "brute":
        route, value = exact.brute_force_opt(inst, obj)
    else:
        route, value = exact.pareto_dp_opt(inst, obj)
    report = build_report(inst, route, {
        "id": "exact", "method": method, "norm": norm_label(obj), "value": value,
    }, t0)
    _emit(report.to_obj(), args.out)
    if args.csv:
        _write_topk_csv(args.csv, inst, route)
    _route_figure(args, inst, route)
    return 0


def cmd_approx(args) -> int:
    t0 = time.perf_counter()
    inst = _read_instance(args.instance)
    if args.algo == "allnorm":
        route = allnorm_approx(inst)
        algo = {"id": "allnorm", "b": "min-positive-distance", "c": 2.0}
    elif args.grid is not None:
        route = tfp_derandomized(inst, args.grid)
        algo = {"id": "tfp-derandomized", "grid": args.grid}
    else:
        if args.seed is None:
            raise UsageError("tfp requires --seed (or --grid for the derandomized form)")
        route = tfp_approx(inst, args.seed)
        algo = {"id": "tfp", "seed": args.seed}
    report = build_report(inst, route, algo, t0)
    _emit(report.to_obj(), args.out)
    if args.csv:
        _write_topk_csv(args.csv, inst, route)
    _route_figure(args, inst, route)
    return 0


def cmd_reduce(args) -> int:
    t0 = time.perf_counter()
    inst = _read_instance(args.instance)
    config = ReductionConfig(epsilon=args.eps, k=args.k)
    if args.oracle != "brute":
        raise UsageError(f"unknown oracle {args.oracle!r}; only 'brute' ships")
    res = lp_via_segmented(inst, args.p, config, segmented_bruteforce)
    report = build_report(inst, res.route, {
        "id": "segmented-reduction", "p": args.p, "eps": args.eps, "k": args.k,
        "j": res.j, "oracle": args.oracle, "value_bound": res.value,
        "oracle_calls": res.oracle_calls,
    }, t0)
    obj = report.to_obj()
    obj["trace"] = res.trace
    _emit(obj, args.out)
    return 0


def cmd_verify_lb(args) -> int:
    t0 = time.perf_counter()
    if args.appendix:
        line = appendix_instance()
    elif args.instance:
        inst = _read_instance(args.instance)
        if not isinstance(inst.spec, LineMetric):
            raise UsageError("verify-lb requires a line-metric instance")
        line = LineInstance(inst.spec.coords, inst.spec.coords[inst.start])
    else:
        raise UsageError("verify-lb needs --appendix or --instance")
    cert = allnorm_gap(line)
    obj = {
        "n": line.n,
        "candidates": len(cert.routes),
        "gap": cert.gap,
        "best_route": list(cert.routes[cert.best_index]),
        "per_k_optima": [float(x) for x in cert.per_norm_optima],
        "wall_time_s": time.perf_counter() - t0,
    }
    _emit(obj, args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["candidate", "k", "ratio"])
            for i in range(len(cert.routes)):
                for k, r in enumerate(cert.ratio_curve(i), start=1):
                    w.writerow([i, k, r])
    if args.svg:
        plotting.draw_gap_curves(cert, args.svg)
    return 0


def cmd_eval(args) -> int:
    t0 = time.perf_counter()
    obj = parse_norm(args.norm)
    inst = _read_instance(args.instance)
    with open(args.route) as fh:
        route = [int(x) for x in json.load(fh)]
    value = norm(visit_times(inst, route), obj)
    report = build_report(inst, route, {
        "id": "eval", "norm": norm_label(obj), "value": value,
    }, t0)
    _emit(report.to_obj(), args.out)
    if args.csv:
        _write_topk_csv(args.csv, inst, route)
    _route_figure(args, inst, route)
    return 0


def cmd_validate(args) -> int:
    if args.instance in (None, "-"):
        raw = json.load(sys.stdin)
    else:
        with open(args.instance) as fh:
            raw = json.load(fh)
    metric = raw.get("metric") if isinstance(raw, dict) else None
    if isinstance(metric, dict) and metric.get("type") == "explicit":
        # bypass construction-time checks so axiom failures become report
        # entries (exit 1) instead of parse errors (exit 2)
        table = np.asarray(metric.get("matrix"), dtype=float)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise UsageError("explicit matrix must be square")
        spec = ExplicitMatrix(tuple(tuple(float(x) for x in row) for row in table))
        inst = Instance(start=int(raw["start"]), dist=table, spec=spec)
    else:
        inst = parse_instance(raw)
    violations = validate_metric(inst.dist)
    obj = {
        "n": inst.n,
        "start": inst.start,
        "digest": instance_digest(inst),
        "violations": [
            {"kind": v.kind, "witness": list(v.witness), "magnitude": v.magnitude}
            for v in violations
        ],
    }
    _emit(obj, args.out)
    return 1 if violations else 0


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lptsp",
        description="Minkowski-norm TSP: exact solvers, covering approximations, "
                    "segmented reduction, and the all-norm gap verifier.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance JSON")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--eps", type=float, default=None)
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--out")
    g.set_defaults(fn=cmd_gen)

    def add_io(p, csv_svg=True):
        p.add_argument("--instance", help="instance JSON path ('-' or omit for stdin)")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        if csv_svg:
            p.add_argument("--csv", help="write the Top-k sweep table here")
            p.add_argument("--svg", help="render a figure here (.svg or .png)")

    s = sub.add_parser("solve", help="exact optimum for one norm")
    s.add_argument("--norm", required=True, help="l1 | l2 | lp:<p> | linf | topk:<k>")
    s.add_argument("--method", choices=("auto", "brute", "pareto"), default="auto")
    add_io(s)
    s.set_defaults(fn=cmd_solve)

    a = sub.add_parser("approx", help="covering approximations")
    a.add_argument("--algo", choices=("allnorm", "tfp"), required=True)
    a.add_argument("--seed", type=int, help="mandatory for randomized tfp")
    a.add_argument("--grid", type=int, help="derandomized tfp with this grid size")
    add_io(a)
    a.set_defaults(fn=cmd_approx)

    r = sub.add_parser("reduce", help="p-norm optimum via segmented decisions")
    r.add_argument("--p", type=float, required=True)
    r.add_argument("--eps", type=float, required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--oracle", default="brute")
    add_io(r, csv_svg=False)
    r.set_defaults(fn=cmd_reduce)

    v = sub.add_parser("verify-lb", help="all-norm gap certificate on a line")
    v.add_argument("--appendix", action="store_true", help="use the embedded 150-point instance")
    add_io(v)
    v.set_defaults(fn=cmd_verify_lb)

    e = sub.add_parser("eval", help="evaluate a route file under one norm")
    e.add_argument("--route", required=True, help="JSON array of vertex indices")
    e.add_argument("--norm", required=True)
    add_io(e)
    e.set_defaults(fn=cmd_eval)

    c = sub.add_parser("validate", help="check the metric axioms of an instance")
    c.add_argument("--instance")
    c.add_argument("--out")
    c.set_defaults(fn=cmd_validate)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, ValueError, MetricError, RouteError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
