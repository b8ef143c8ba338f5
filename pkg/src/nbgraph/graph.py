"""The concurrent weighted digraph: vertex and edge operations plus queries."""

from __future__ import annotations

import math
import threading
from collections import deque
from typing import IO, Dict, Iterable, List, NamedTuple, Optional, Tuple

from . import edge_tree
from .atomic import AtomicCounter
from .edge_tree import Outcome
from .vertex_store import VertexNode, VertexStore

INF = math.inf


class EdgeResult(NamedTuple):
    status: bool
    weight: float


class ThreadCapacityError(RuntimeError):
    pass


class ConsistencyMode:
    LINEARIZABLE = "lin"
    SINGLE_COLLECT = "icn"


class Graph:
    """Lock-free dynamic directed graph with linearizable snapshot queries.

    Every thread that touches the graph occupies one of ``capacity`` slots.
    Threads are registered on first use; ``release_thread`` frees a slot for
    reuse by later threads.
    """

    def __init__(
        self,
        capacity: int = 64,
        initial_buckets: int = 16,
        mode: str = ConsistencyMode.LINEARIZABLE,
    ) -> None:
        self.capacity = capacity
        self.mode = mode
        self.store = VertexStore(capacity=capacity, initial_size=initial_buckets)
        self._local = threading.local()
        self._slot_lock = threading.Lock()
        self._free = list(range(capacity - 1, -1, -1))
        # Collect counter per slot; lives with the slot so a reused slot
        # never sees a stale visit stamp.
        self.cnt = [0] * capacity
        # Successful updates so far; queries report how many landed during
        # their lifetime.
        self.update_clock = AtomicCounter()

    # -- thread slots ----------------------------------------------------

    def register_thread(self) -> int:
        tid = getattr(self._local, "tid", None)
        if tid is not None:
            return tid
        with self._slot_lock:
            if not self._free:
                raise ThreadCapacityError(f"all {self.capacity} thread slots are taken")
            tid = self._free.pop()
        self._local.tid = tid
        return tid

    def release_thread(self) -> None:
        tid = getattr(self._local, "tid", None)
        if tid is None:
            return
        del self._local.tid
        with self._slot_lock:
            self._free.append(tid)

    def tid(self) -> int:
        tid = getattr(self._local, "tid", None)
        return tid if tid is not None else self.register_thread()

    # -- vertices --------------------------------------------------------

    def put_vertex(self, v: int) -> bool:
        ok = self.store.add(v)
        if ok:
            self.update_clock.fetch_add(1)
        return ok

    def remove_vertex(self, v: int) -> bool:
        ok = self.store.remove(v)
        if ok:
            self.update_clock.fetch_add(1)
        return ok

    def get_vertex(self, v: int) -> bool:
        return self.store.contains(v)[0]

    def vertex_node(self, v: int) -> Optional[VertexNode]:
        return self.store.contains(v)[1]

    def con_v_plus(self, v1: int, v2: int) -> Tuple[Optional[VertexNode], Optional[VertexNode], bool]:
        st1, u = self.store.contains(v1)
        st2, v = self.store.contains(v2)
        if st1 and st2:
            return u, v, True
        return u, u, False

    # -- edges -----------------------------------------------------------

    @staticmethod
    def _check_weight(w: float) -> float:
        w = float(w)
        if not math.isfinite(w):
            raise ValueError(f"edge weight must be finite, got {w}")
        return w

    def put_edge(self, v1: int, v2: int, w: float) -> EdgeResult:
        w = self._check_weight(w)
        VertexStore.check_key(v1)
        VertexStore.check_key(v2)
        if v1 == v2:
            return EdgeResult(False, INF)
        u, v, ok = self.con_v_plus(v1, v2)
        if not ok:
            return EdgeResult(False, INF)
        outcome, z = edge_tree.insert_or_update(v2, w, v, u.enxt, u)
        if outcome is Outcome.INSERTED or outcome is Outcome.UPDATED:
            self.update_clock.fetch_add(1)
        if outcome is Outcome.INSERTED:
            return EdgeResult(True, INF)
        if outcome is Outcome.UPDATED:
            return EdgeResult(True, z)
        if outcome is Outcome.UNCHANGED:
            return EdgeResult(False, w)
        return EdgeResult(False, INF)

    def remove_edge(self, v1: int, v2: int) -> EdgeResult:
        VertexStore.check_key(v1)
        VertexStore.check_key(v2)
        if v1 == v2:
            return EdgeResult(False, INF)
        u, v, ok = self.con_v_plus(v1, v2)
        if not ok:
            return EdgeResult(False, INF)
        outcome, z = edge_tree.remove(v2, u.enxt, u)
        if outcome is Outcome.REMOVED:
            self.update_clock.fetch_add(1)
            return EdgeResult(True, z)
        return EdgeResult(False, INF)

    def get_edge(self, v1: int, v2: int) -> EdgeResult:
        VertexStore.check_key(v1)
        VertexStore.check_key(v2)
        if v1 == v2:
            return EdgeResult(False, INF)
        u, v, ok = self.con_v_plus(v1, v2)
        if not ok:
            return EdgeResult(False, INF)
        rec = edge_tree.lookup(v2, u.enxt)
        if rec is not None and not rec.ptv.marked and not u.marked:
            return EdgeResult(True, rec.weight)
        return EdgeResult(False, INF)

    # -- queries ---------------------------------------------------------

    def bfs(self, v: int, mode: Optional[str] = None):
        from .queries import bfs

        return bfs(self, v, mode)

    def sssp(self, v: int, mode: Optional[str] = None):
        from .queries import sssp

        return sssp(self, v, mode)

    def bc(self, v: int, mode: Optional[str] = None):
        from .queries import bc

        return bc(self, v, mode)

    def bc_single_source(self, s: int, mode: Optional[str] = None):
        from .queries import bc_single_source

        return bc_single_source(self, s, mode)

    # -- bulk load and inspection ---------------------------------------

    def load_edges(self, n_vertices: int, edges: Iterable[Tuple[int, int, float]]) -> None:
        """Add vertices 0..n-1, then the edges; a repeated (src, dst) keeps the last weight.

        Each vertex's out-edges go in median-first so its tree is balanced
        instead of the chain that sorted input would build.
        """
        for k in range(n_vertices):
            self.put_vertex(k)
        adj: Dict[int, Dict[int, float]] = {}
        for src, dst, w in edges:
            adj.setdefault(src, {})[dst] = w
        for src, out in adj.items():
            dsts = sorted(out)
            spans = deque([(0, len(dsts))])
            while spans:
                lo, hi = spans.popleft()
                if lo < hi:
                    mid = (lo + hi) // 2
                    self.put_edge(src, dsts[mid], out[dsts[mid]])
                    spans.append((lo, mid))
                    spans.append((mid + 1, hi))

    def load_adjacency(self, stream: IO[str]) -> None:
        from .rmat import read_adjacency

        n, edges = read_adjacency(stream)
        self.load_edges(n, ((s, d, 1.0 if w is None else w) for s, d, w in edges))

    def vertices(self) -> List[int]:
        return self.store.keys()

    def edges(self) -> List[Tuple[int, int, float]]:
        """All present edges as (src, dst, weight). Not atomic."""
        out = []
        for n in sorted(self.store.nodes(), key=lambda n: n.key):
            if n.marked:
                continue
            for _, rec in edge_tree.iter_edges(n.enxt):
                out.append((n.key, rec.key, rec.weight))
        return out

    def ecnt(self, v: int) -> Optional[int]:
        node = self.vertex_node(v)
        return None if node is None else node.oi.ecnt.load()

    def check_invariants(self) -> None:
        """Structural checks; only meaningful when no update is in flight."""
        self.store.check_invariants()
        for n in self.store.nodes():
            edge_tree.check_tree(n.enxt)
