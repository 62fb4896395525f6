"""Branch-and-bound trees, classical search, and a simulated quantum speedup ledger."""

from .core import INF, ProblemOracle, TreeOracle, binarize, count_nodes, example_tree, monotone_wrap, truncate
from .search import SearchOutcome, best_first, depth_first_incumbent, tree_stats, truncated_size

__version__ = "0.1.0"

__all__ = [
    "INF",
    "ProblemOracle",
    "TreeOracle",
    "binarize",
    "count_nodes",
    "example_tree",
    "monotone_wrap",
    "truncate",
    "SearchOutcome",
    "best_first",
    "depth_first_incumbent",
    "tree_stats",
    "truncated_size",
]
