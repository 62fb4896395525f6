"""Classical execution of quantum branch-and-bound with a query-cost ledger.

The quantum tree-search and tree-size-estimation subroutines are replaced
by exact classical traversals that honour their input/output contracts.
Each call is charged the query count of its quantum counterpart, with all
big-O constants set to 1, logs in base 2, and every log factor floored at 1.
"""

from __future__ import annotations

import enum
import json
import math
import random
from dataclasses import asdict, dataclass, field

from .core import INF, Cost, NodePath, ProblemOracle

DEFAULT_K = 10


def _lg(x: float) -> float:
    return max(1.0, math.log2(x))


def treesearch_cost(T: int, d: int, eps: float) -> int:
    """Queries of quantum tree search on a tree of size T and depth d."""
    return math.ceil(math.sqrt(max(T, 1)) * max(d, 1) ** 1.5 * _lg(d) * _lg(1 / eps))


def count_cost(T0: int, d: int, delta: float, eps: float) -> int:
    """Queries of quantum tree-size estimation with threshold T0."""
    return math.ceil(math.sqrt(max(T0, 1) * max(d, 1)) * delta**-1.5 * _lg(1 / eps) ** 2)


def jarret_wan_cost(T: int, d: int, m: int, eps: float) -> int:
    """Alternative tree-search cost with m marked nodes (comparison only)."""
    return math.ceil(math.sqrt(max(T, 1) * max(d, 1)) * _lg(m * d) ** 4 * _lg(m / eps))


def theorem1_bound(T_min: int, d: int, c_max: int, eps: float) -> int:
    """Total-query bound of the whole algorithm, constants set to 1."""
    return math.ceil(theorem1_bound_real(T_min, d, c_max, eps))


def theorem1_bound_real(T_min: float, d: int, c_max: int, eps: float) -> float:
    d = max(d, 1)
    lc = _lg(c_max)
    L = _lg(d * lc / eps)
    return math.sqrt(max(T_min, 1) * d) * lc * L * (L + d * _lg(d))


@dataclass
class SubroutineParams:
    epsilon_prime: float
    delta: float = 0.5
    K: float = DEFAULT_K

    def __post_init__(self):
        if not 0 < self.epsilon_prime < 1:
            raise ValueError(f"epsilon_prime must lie in (0, 1), got {self.epsilon_prime}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")


class GrayZoneMode(enum.Enum):
    TRUTHFUL = "truthful"
    ALWAYS_EXCEEDS = "always-exceeds"
    ALWAYS_ESTIMATE = "always-estimate"
    RANDOM = "random"


@dataclass
class GrayZonePolicy:
    """How the size estimator answers when T_c is in (T0/(1+d), (1+d)T0].

    ``TRUTHFUL`` answers "exceeds" exactly when T_c > T0.  ``RANDOM`` flips
    a coin from its own seeded generator.
    """

    mode: GrayZoneMode = GrayZoneMode.TRUTHFUL
    seed: int = 0

    def __post_init__(self):
        self.mode = GrayZoneMode(self.mode)
        self._rng = random.Random(self.seed)

    @classmethod
    def parse(cls, name: str, seed: int = 0) -> "GrayZonePolicy":
        return cls(GrayZoneMode(name), seed)

    def exceeds(self, size: int, T0: int) -> bool:
        if self.mode is GrayZoneMode.TRUTHFUL:
            return size > T0
        if self.mode is GrayZoneMode.ALWAYS_EXCEEDS:
            return True
        if self.mode is GrayZoneMode.ALWAYS_ESTIMATE:
            return False
        return self._rng.random() < 0.5

    @property
    def name(self) -> str:
        return self.mode.value


ALL_POLICIES = tuple(m.value for m in GrayZoneMode)

EXCEEDS = "exceeds"


@dataclass
class QueryLedger:
    count_calls: list = field(default_factory=list)  # (c, T0, charged)
    search_calls: list = field(default_factory=list)  # (c, T_c, charged)
    iterations: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(ch for *_, ch in self.count_calls) + sum(ch for *_, ch in self.search_calls)

    def to_dict(self) -> dict:
        return {"params": self.params, "iterations": self.iterations, "total": self.total}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass
class QbbOutcome:
    solution: NodePath | None
    cost: Cost
    ledger: QueryLedger
    iterations: int

    @property
    def found(self) -> bool:
        return self.solution is not None


def count_sim(
    oracle: ProblemOracle,
    c: Cost,
    T0: int,
    params: SubroutineParams,
    policy: GrayZonePolicy,
    noise: random.Random | None = None,
):
    """Simulated tree-size estimation of the tree truncated at ``c``.

    Returns ``(answer, charged)`` where ``answer`` is an integer estimate
    or :data:`EXCEEDS`.  Below the gray zone the exact size is returned
    (or a value within a factor 1 +/- delta of it when ``noise`` is given);
    above it the answer is always :data:`EXCEEDS`.
    """
    delta = params.delta
    charged = count_cost(T0, oracle.depth, delta, params.epsilon_prime)
    # sizes above (1+delta)*T0 are only ever compared, so stop counting there
    cap = math.floor((1 + delta) * T0)
    size = oracle.truncated_size(c, limit=cap)
    if size > (1 + delta) * T0:
        return EXCEEDS, charged
    if size <= T0 / (1 + delta):
        if noise is None:
            return size, charged
        est = round(size * (1 + delta * noise.uniform(-1, 1)))
        return min(max(est, 0), T0), charged
    if policy.exceeds(size, T0):
        return EXCEEDS, charged
    return size, charged


def search_sim(oracle: ProblemOracle, c: Cost, params: SubroutineParams):
    """Simulated tree search for a solution in the tree truncated at ``c``.

    Returns ``(found, charged)`` where ``found`` is ``(path, cost)`` for the
    lowest-cost solution (first in path order on ties) or None.
    """
    size = oracle.truncated_size(c)
    charged = treesearch_cost(max(size, 1), oracle.depth, params.epsilon_prime)
    found = oracle.search_truncated(c) if size > 0 else None
    return found, charged, size


def qbb(
    oracle: ProblemOracle,
    c_max: int | None = None,
    T_max: int | None = None,
    eps: float = 0.1,
    policy: GrayZonePolicy | None = None,
    K: float = DEFAULT_K,
    noise_seed: int | None = None,
) -> QbbOutcome:
    """Run the quantum branch-and-bound loop with simulated subroutines.

    ``c_max`` defaults to the oracle's bound and is rounded up to a power of
    two; ``T_max`` defaults to the oracle's node-count bound.
    """
    if policy is None:
        policy = GrayZonePolicy()
    if c_max is None:
        c_max = oracle.c_max
    c_max = 1 << max(int(c_max) - 1, 0).bit_length()
    if T_max is None:
        T_max = oracle.t_max
    d = max(oracle.depth, 1)
    log_c = int(math.log2(c_max))
    eps_prime = eps / (K * d * max(log_c, 1))
    params = SubroutineParams(eps_prime, 0.5, K)
    noise = random.Random(noise_seed) if noise_seed is not None else None
    ledger = QueryLedger(
        params={
            "eps": eps,
            "epsilon_prime": eps_prime,
            "delta": params.delta,
            "K": K,
            "c_max": c_max,
            "T_max": T_max,
            "depth": oracle.depth,
            "policy": policy.name,
        }
    )

    T, c_old, iteration = 1, 0, 0
    while T <= T_max:
        iteration += 1
        it = {"T": T, "c_old": c_old, "count_calls": [], "search_calls": []}
        ledger.iterations.append(it)
        if T > T_max / 2:
            c_new = c_max
        else:
            c_new = 0
            for i in range(1, log_c + 1):
                probe = c_new + c_max // 2**i
                answer, charged = count_sim(oracle, probe, T, params, policy, noise)
                ledger.count_calls.append((probe, T, charged))
                it["count_calls"].append({"c": probe, "answer": answer, "charged": charged})
                if answer != EXCEEDS:
                    c_new = probe
        it["c_new"] = c_new

        found, charged, size = search_sim(oracle, c_new, params)
        ledger.search_calls.append((c_new, size, charged))
        it["T_c_new"] = size
        it["search_calls"].append({"c": c_new, "T_c": size, "found": found is not None, "charged": charged})
        if found is not None:
            best = found
            lo, hi = c_old, c_new
            while lo < hi:
                mid = (lo + hi) // 2
                probe_found, charged, size = search_sim(oracle, mid, params)
                ledger.search_calls.append((mid, size, charged))
                it["search_calls"].append(
                    {"c": mid, "T_c": size, "found": probe_found is not None, "charged": charged}
                )
                if probe_found is not None:
                    hi, best = mid, probe_found
                else:
                    lo = mid + 1
            return QbbOutcome(best[0], best[1], ledger, iteration)
        T, c_old = 2 * T, c_new
    return QbbOutcome(None, INF, ledger, iteration)
