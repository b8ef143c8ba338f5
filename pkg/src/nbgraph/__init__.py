"""Concurrent lock-free weighted digraph with linearizable snapshot queries."""

from .graph import ConsistencyMode, EdgeResult, Graph, ThreadCapacityError
from .queries import BcResult, BfsTree, SpTree
from .snapshot import StarvationError

__all__ = [
    "BcResult",
    "BfsTree",
    "ConsistencyMode",
    "EdgeResult",
    "Graph",
    "SpTree",
    "StarvationError",
    "ThreadCapacityError",
]
