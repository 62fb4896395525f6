"""Command-line entry point: ``bnblab <command> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds, harness, knapsack, quantum, sk
from .core import example_tree
from .search import SearchMemoryError, best_first, depth_first_incumbent


def parse_n_list(text: str) -> list[int]:
    """``"16:34:2"`` (inclusive range) or ``"10,12,14"``."""
    if ":" in text:
        parts = [int(t) for t in text.split(":")]
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(lo, hi + 1, step))
    return [int(t) for t in text.split(",") if t]


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, default=float))


def cmd_gen(args) -> int:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for i in range(args.count):
            inst = sk.generate(args.n, (args.seed, i))
            path = out / f"sk_n{args.n}_s{args.seed}_{i:04d}.txt"
            sk.save_instance(inst, path, args.p_bits)
            print(path)
    except OSError as exc:
        print(f"error: cannot write instances to {out}: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_solve(args) -> int:
    try:
        raw, p = sk.load_instance(args.instance)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    inst = sk.discretize(raw, args.p_bits or p)
    oracle = sk.sk_oracle(inst, fix_first_spin=args.fix_first_spin)
    if args.strategy == "dfs":
        out = oracle.depth_first()
    else:
        try:
            out = best_first(oracle, max_live=args.max_live)
        except SearchMemoryError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 3
    e_min = int(out.cost) - inst.shift
    report = {
        "schema_version": harness.SCHEMA_VERSION,
        "n": inst.n,
        "p": inst.p,
        "strategy": args.strategy,
        "e_min": e_min,
        "e_norm": harness.normalized_energy(int(out.cost), inst.shift, inst.p, inst.n),
        "explored": out.explored_nodes,
        "spins": oracle.spins(out.solution),
    }
    if args.exact_tmin:
        report["t_min"] = oracle.truncated_size(out.cost)
    _emit(report)
    return 0


def cmd_sweep(args) -> int:
    ns = parse_n_list(args.n)
    records = harness.sweep(
        ns, args.per_n, args.seed, args.p_bits, args.fix_first_spin, not args.no_tmin, args.workers
    )
    harness.write_sweep_csv(records, args.out)
    for n, m in harness.medians_by_n(records).items():
        print(f"n={n:3d} median tree size {m:12.1f}", file=sys.stderr)
    print(args.out)
    return 0


def cmd_fit(args) -> int:
    try:
        records = harness.read_sweep_csv(args.csv)
        fit = harness.fit_scaling(records, args.n_min)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    med_e = harness.medians_by_n(records, "e_norm")
    _emit(
        {
            "schema_version": harness.SCHEMA_VERSION,
            "slope": fit.slope,
            "intercept": fit.intercept,
            "n_min_used": fit.n_min_used,
            "residual": fit.residual,
            "points": fit.points,
            "median_e_norm": {str(k): v for k, v in med_e.items()},
        }
    )
    return 0


def cmd_qcost(args) -> int:
    policies = quantum.ALL_POLICIES if args.policy == "all" else (args.policy,)
    reports = []
    ledger_doc = None
    try:
        if args.example_tree:
            tree = example_tree()
            for pol in policies:
                rep, out = harness.qcost(tree, "example", 4, args.eps, pol, args.K, seed=args.seed)
                reports.append(rep)
                ledger_doc = out.ledger.to_dict()
        elif args.instance:
            for path in args.instance:
                raw, p = sk.load_instance(path)
                inst = sk.discretize(raw, p)
                g = sk.solve(inst)
                for pol in policies:
                    rep, out = harness.qcost(
                        g.oracle, str(path), g.energy + inst.shift, args.eps, pol, args.K, seed=args.seed, n=inst.n
                    )
                    reports.append(rep)
                    ledger_doc = out.ledger.to_dict()
        else:
            for n in parse_n_list(args.n):
                for i in range(args.per_n):
                    for pol in policies:
                        reports.append(harness.qcost_sk(n, args.seed, i, args.eps, pol, args.K, args.p_bits))
    except harness.QbbMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    ratios = [r.ratio for r in reports]
    summary = {
        "schema_version": harness.SCHEMA_VERSION,
        "reports": [r.to_dict() for r in reports],
        "max_ratio": max(ratios),
        "min_ratio": min(ratios),
    }
    if len({r.t_min for r in reports}) >= 2:
        summary["pooled_slope"] = harness.pooled_slope(reports)
        if len({r.depth for r in reports}) < len(reports):
            summary["within_depth_slope"] = harness.within_depth_slope(reports)
    if args.ledger_out and ledger_doc is not None:
        Path(args.ledger_out).write_text(json.dumps(ledger_doc, indent=2))
    _emit(summary)
    return 0


def cmd_verify_bounds(args) -> int:
    checks = []

    def claim(name, ok, detail):
        checks.append({"claim": name, "pass": bool(ok), **detail})

    grid = args.grid
    r = bounds.max_scan(bounds.h1, (0, 1), grid, refine=True)
    claim("max h1 on [0,1] < 0.45003", r.value + r.resolution < 0.45003, {"alpha": r.alpha, "value": r.value, "resolution": r.resolution})
    r = bounds.max_scan(bounds.h2, (0.9, 1), grid, refine=True)
    claim("max h2 on [0.9,1] < 0.45003", r.value + r.resolution < 0.45003, {"alpha": r.alpha, "value": r.value, "resolution": r.resolution})
    r = bounds.min_scan(bounds.g1, (0.4, 1), grid, refine=True)
    claim("min g1 on [0.4,1] >= -0.763", r.value - r.resolution >= -0.763, {"alpha": r.alpha, "value": r.value, "resolution": r.resolution})
    r = bounds.min_scan(bounds.g2, (0.9, 1), grid, refine=True)
    claim("min g2 on [0.9,1] >= -0.763", r.value - r.resolution >= -0.763, {"alpha": r.alpha, "value": r.value, "resolution": r.resolution})

    for n in args.mean_n:
        m = bounds.lemma3_check(n, args.trials, args.seed)
        claim(f"mean ground-state bound n={n}", m.passes(4.0),
              {"mean": m.mean, "stderr": m.stderr, "bound": m.bound, "margin_sigmas": m.margin_sigmas})

    rows = bounds.concentration_check(args.conc_n, args.conc_trials, seed=args.seed)
    claim(f"concentration tails n={args.conc_n}", not any(row.violated() for row in rows),
          {"rows": [vars(row) for row in rows]})

    if args.tree_tail:
        for n in (14, 16, 18):
            frac, _ = bounds.tree_size_tail_fraction(n, 100, args.seed)
            claim(f"fraction T_min >= 2^(0.451n) at n={n} <= 0.05", frac <= 0.05, {"fraction": frac})

    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, f in bounds.ALPHA_FUNCTIONS.items():
            bounds.write_alpha_table(out / f"{name}.csv", f)
        bounds.write_tail_table(out / "concentration.csv", rows)

    _emit({"schema_version": harness.SCHEMA_VERSION, "grid": grid, "checks": checks})
    return 0 if all(c["pass"] for c in checks) else 1


def cmd_knapsack(args) -> int:
    try:
        inst = knapsack.load_instance(args.instance)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    oracle = knapsack.knapsack_oracle(inst)
    out = best_first(oracle) if args.strategy == "best-first" else depth_first_incumbent(oracle)
    dp = knapsack.dp_oracle(inst)
    value = oracle.value_of(out.cost)
    _emit(
        {
            "schema_version": harness.SCHEMA_VERSION,
            "value_bnb": value,
            "value_dp": dp,
            "items": oracle.solution_items(out.solution),
            "explored": out.explored_nodes,
        }
    )
    return 0 if value == dp else 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bnblab", description="Branch-and-bound laboratory for S-K spin glasses and knapsack.")
    sub = ap.add_subparsers(dest="command", required=True)

    def fix_flag(p):
        p.add_argument("--fix-first-spin", dest="fix_first_spin", action="store_true", default=True,
                       help="pin spin 1 to +1, halving the tree (default)")
        p.add_argument("--no-fix-first-spin", dest="fix_first_spin", action="store_false")

    p = sub.add_parser("gen", help="write random S-K instance files")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-bits", type=int, default=None, help="precision stored in the file (default ceil(log2 n)+6)")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="ground state of one instance file")
    p.add_argument("instance")
    p.add_argument("--strategy", choices=["dfs", "best-first"], default="dfs")
    p.add_argument("--exact-tmin", action="store_true", help="also count the tree truncated at the optimum")
    p.add_argument("--p-bits", type=int, default=None, help="override the file's precision")
    p.add_argument("--max-live", type=int, default=10_000_000, help="best-first live-node budget")
    fix_flag(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve seeded instances and write a CSV",
                       description="Defaults: n = 16..34 step 2, 25 instances per n (a desk-scale "
                                   "version of a 99-instance, n <= 50 experiment).")
    p.add_argument("--n", default="16:34:2", help="range lo:hi:step or comma list")
    p.add_argument("--per-n", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-bits", type=int, default=None)
    p.add_argument("--workers", type=int, default=None, help="processes (default: CPU count)")
    p.add_argument("--no-tmin", action="store_true", help="skip exact truncated-tree counts")
    p.add_argument("--out", default="sweep.csv")
    fix_flag(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="least-squares fit of log2 median tree size vs n")
    p.add_argument("csv")
    p.add_argument("--n-min", type=int, default=16)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("qcost", help="simulate quantum branch-and-bound and report the query ledger")
    p.add_argument("instance", nargs="*")
    p.add_argument("--example-tree", action="store_true", help="use the built-in 13-node example tree")
    p.add_argument("--n", default="12")
    p.add_argument("--per-n", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-bits", type=int, default=None)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--K", type=float, default=quantum.DEFAULT_K)
    p.add_argument("--policy", choices=[*quantum.ALL_POLICIES, "all"], default="truthful")
    p.add_argument("--ledger-out", default=None, help="write the last run's ledger JSON here")
    p.set_defaults(func=cmd_qcost)

    p = sub.add_parser("verify-bounds", help="numerically check the tree-size analysis")
    p.add_argument("--grid", type=int, default=10**5)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--mean-n", type=int, nargs="*", default=[8, 10, 12])
    p.add_argument("--conc-n", type=int, default=10)
    p.add_argument("--conc-trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tree-tail", action="store_true", help="also run the finite-n tree-size tail check")
    p.add_argument("--out-dir", default=None, help="write CSV tables here")
    p.set_defaults(func=cmd_verify_bounds)

    p = sub.add_parser("knapsack", help="solve a knapsack file by LP-relaxation branch-and-bound")
    p.add_argument("instance")
    p.add_argument("--strategy", choices=["dfs", "best-first"], default="best-first")
    p.set_defaults(func=cmd_knapsack)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
