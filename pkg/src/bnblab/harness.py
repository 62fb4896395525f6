"""Instance sweeps, scaling fits and query-ledger reports."""

from __future__ import annotations

import csv
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import quantum, sk

SCHEMA_VERSION = 1
CSV_MAGIC = f"# bnblab sweep v{SCHEMA_VERSION}"


@dataclass
class SweepRecord:
    n: int
    instance_index: int
    seed: str
    p: int
    shift: int
    tree_size_dfs: int
    t_min: int | None
    e_min: int  # discretized energy, unshifted
    c_min: int  # e_min + shift, the optimal node cost
    e_norm: float
    wall_time_ms: float


CSV_FIELDS = [f.name for f in fields(SweepRecord)]


@dataclass
class FitResult:
    slope: float
    intercept: float
    n_min_used: int
    residual: float  # RMS of log2 residuals
    points: int


def normalized_energy(c_min: int, shift: int, p: int, n: int) -> float:
    return (c_min - shift) / 2**p / n**1.5


def run_instance(
    n: int,
    base_seed: int,
    index: int,
    p: int | None = None,
    fix_first_spin: bool = True,
    exact_tmin: bool = True,
) -> SweepRecord:
    start = time.perf_counter()
    inst = sk.discretize(sk.generate(n, (base_seed, index)), p)
    g = sk.solve(inst, fix_first_spin=fix_first_spin)
    c_min = g.energy + inst.shift
    t_min = g.oracle.truncated_size(c_min) if exact_tmin else None
    elapsed = (time.perf_counter() - start) * 1000
    return SweepRecord(
        n=n,
        instance_index=index,
        seed=f"{base_seed}:{index}",
        p=inst.p,
        shift=inst.shift,
        tree_size_dfs=g.explored,
        t_min=t_min,
        e_min=g.energy,
        c_min=c_min,
        e_norm=normalized_energy(c_min, inst.shift, inst.p, n),
        wall_time_ms=round(elapsed, 3),
    )


def _run_job(args):
    return run_instance(*args)


def sweep(
    n_list,
    per_n: int,
    base_seed: int,
    p: int | None = None,
    fix_first_spin: bool = True,
    exact_tmin: bool = True,
    workers: int | None = 1,
) -> list[SweepRecord]:
    """Solve ``per_n`` instances for every n; rows come back in job order."""
    jobs = [(n, base_seed, i, p, fix_first_spin, exact_tmin) for n in n_list for i in range(per_n)]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(jobs) <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs, chunksize=1))


def write_sweep_csv(records, path) -> None:
    """Write rows atomically: a temp file in the target directory is renamed into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name, suffix=".part", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(CSV_MAGIC + "\n")
            w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
            w.writeheader()
            for r in records:
                row = asdict(r)
                if row["t_min"] is None:
                    row["t_min"] = ""
                w.writerow(row)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_sweep_csv(path) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append(
            SweepRecord(
                n=int(row["n"]),
                instance_index=int(row["instance_index"]),
                seed=row["seed"],
                p=int(row["p"]),
                shift=int(row["shift"]),
                tree_size_dfs=int(row["tree_size_dfs"]),
                t_min=int(row["t_min"]) if row["t_min"] else None,
                e_min=int(row["e_min"]),
                c_min=int(row["c_min"]),
                e_norm=float(row["e_norm"]),
                wall_time_ms=float(row["wall_time_ms"]),
            )
        )
    return out


def medians_by_n(records, attr: str = "tree_size_dfs") -> dict[int, float]:
    groups: dict[int, list] = {}
    for r in records:
        groups.setdefault(r.n, []).append(getattr(r, attr))
    return {n: float(np.median(v)) for n, v in sorted(groups.items())}


def fit_exponential(ns, sizes) -> FitResult:
    """Least-squares line through ``(n, log2 size)``."""
    ns = np.asarray(ns, dtype=float)
    y = np.log2(np.asarray(sizes, dtype=float))
    if len(np.unique(ns)) < 3:
        raise ValueError("need at least 3 distinct n values to fit")
    slope, intercept = np.polyfit(ns, y, 1)
    resid = y - (slope * ns + intercept)
    return FitResult(float(slope), float(intercept), int(ns.min()), float(np.sqrt(np.mean(resid**2))), len(ns))


def fit_scaling(records, n_min: int = 16) -> FitResult:
    """Fit log2 of the per-n median tree size against n, for n >= n_min."""
    med = {n: m for n, m in medians_by_n(records).items() if n >= n_min}
    return fit_exponential(list(med), list(med.values()))


class QbbMismatch(RuntimeError):
    """The simulated quantum algorithm returned a non-optimal cost."""


@dataclass
class QcostReport:
    label: str
    n: int
    depth: int
    c_max: int
    policy: str
    optimum: int
    classical_optimum: int
    t_min: int
    ledger_total: int
    theorem1_bound: int
    ratio: float
    iterations: int

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, **asdict(self)}


def qcost(oracle, label: str, c_min: int, eps: float = 0.1, policy: str = "truthful", K: float = quantum.DEFAULT_K,
          seed: int = 0, n: int = 0):
    """Run the simulated quantum algorithm and compare with the classical optimum.

    Returns ``(report, outcome)``.

    Raises:
        QbbMismatch: if the returned cost differs from ``c_min``.
    """
    pol = quantum.GrayZonePolicy.parse(policy, seed)
    out = quantum.qbb(oracle, eps=eps, policy=pol, K=K)
    if out.cost != c_min:
        raise QbbMismatch(f"{label}: qbb returned cost {out.cost} under {policy}, classical optimum is {c_min}")
    t_min = oracle.truncated_size(c_min)
    c_max = out.ledger.params["c_max"]
    bound = quantum.theorem1_bound(t_min, oracle.depth, c_max, eps)
    rep = QcostReport(
        label=label,
        n=n,
        depth=oracle.depth,
        c_max=c_max,
        policy=policy,
        optimum=int(out.cost),
        classical_optimum=int(c_min),
        t_min=int(t_min),
        ledger_total=out.ledger.total,
        theorem1_bound=bound,
        ratio=out.ledger.total / bound,
        iterations=out.iterations,
    )
    return rep, out


def qcost_sk(n: int, base_seed: int, index: int, eps: float = 0.1, policy: str = "truthful",
             K: float = quantum.DEFAULT_K, p: int | None = None) -> QcostReport:
    inst = sk.discretize(sk.generate(n, (base_seed, index)), p)
    g = sk.solve(inst)
    rep, _ = qcost(g.oracle, f"sk:n={n}:{base_seed}:{index}", g.energy + inst.shift, eps, policy, K, seed=index, n=n)
    return rep


def pooled_slope(reports) -> float:
    """Slope of log2(ledger total) against log2(T_min) over all reports."""
    x = np.log2([r.t_min for r in reports])
    y = np.log2([r.ledger_total for r in reports])
    return float(np.polyfit(x, y, 1)[0])


def within_depth_slope(reports) -> float:
    """Common slope of log2(ledger) on log2(T_min) with a separate intercept per depth.

    Depth enters the ledger polynomially and grows with T_min across a
    sweep; demeaning within each depth removes that confounder.
    """
    xs, ys = [], []
    by_depth: dict[int, list] = {}
    for r in reports:
        by_depth.setdefault(r.depth, []).append(r)
    for group in by_depth.values():
        x = np.log2([r.t_min for r in group])
        y = np.log2([r.ledger_total for r in group])
        xs.append(x - x.mean())
        ys.append(y - y.mean())
    x, y = np.concatenate(xs), np.concatenate(ys)
    return float(np.dot(x, y) / np.dot(x, x))


def depth_overhead_slope(reports) -> float:
    """Log-log slope in depth of the per-depth median of ledger / sqrt(T_min)."""
    by_depth: dict[int, list] = {}
    for r in reports:
        by_depth.setdefault(r.depth, []).append(r.ledger_total / math.sqrt(r.t_min))
    ds = sorted(by_depth)
    med = [np.median(by_depth[d]) for d in ds]
    return float(np.polyfit(np.log2(ds), np.log2(med), 1)[0])
