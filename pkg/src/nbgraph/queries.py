"""BFS, single-source shortest paths and betweenness centrality queries.

Each query is a specialised collect plugged into the double-collect scan.
All scratch state (visit stamps, distances, path counts, dependencies,
predecessor lists, centrality) lives in the calling thread's slot of each
vertex's ``OpItem``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .edge_tree import out_edges
from .snapshot import (
    Collect,
    ScanStats,
    SnapNode,
    chk_visit,
    link,
    next_count,
    op_query,
)
from .vertex_store import VertexNode

INF = math.inf


@dataclass
class BfsTree:
    source: int
    order: List[int]
    parent: Dict[int, Optional[int]]
    level: Dict[int, int]
    stats: ScanStats

    def __len__(self) -> int:
        return len(self.order)


@dataclass
class SpTree:
    """Shortest-path tree. ``dist`` omits unreachable vertices (infinite)."""

    source: int
    neg_cycle: bool
    dist: Dict[int, float] = field(default_factory=dict)
    parent: Dict[int, Optional[int]] = field(default_factory=dict)
    stats: ScanStats = field(default_factory=ScanStats)

    def distance(self, key: int) -> float:
        return self.dist.get(key, INF)


@dataclass
class BcResult:
    source: int
    dependency: Dict[int, float]
    sigma: Dict[int, int]
    stats: ScanStats


def _chain_levels(chain: List[SnapNode]) -> Tuple[List[int], Dict[int, Optional[int]], Dict[int, int]]:
    order, parent, level = [], {}, {}
    for sn in chain:
        k = sn.n.key
        order.append(k)
        if sn.p is None:
            parent[k] = None
            level[k] = 0
        else:
            parent[k] = sn.p.n.key
            level[k] = level[sn.p.n.key] + 1
    return order, parent, level


# --------------------------------------------------------------------------
# BFS


def bfs_tree_collect(graph, v: VertexNode, tid: int) -> Collect:
    from .snapshot import tree_collect

    return tree_collect(graph, v, tid)


def bfs(graph, key: int, mode: Optional[str] = None, deadline: Optional[float] = None) -> Optional[BfsTree]:
    """Vertices reachable from ``key`` in BFS order, or None if it is absent."""
    out = op_query(graph, key, bfs_tree_collect, mode, deadline)
    if out is None:
        return None
    collect, stats = out
    order, parent, level = _chain_levels(collect.chain)
    return BfsTree(key, order, parent, level, stats)


# --------------------------------------------------------------------------
# SSSP


def _dist(node: VertexNode, tid: int, cnt: int) -> float:
    oi = node.oi
    return oi.DistA[tid] if oi.VisA[tid] == cnt else INF


def relax(tid: int, cnt: int, u: VertexNode, v: VertexNode, weight: float) -> bool:
    """Lower v's distance through u if that is strictly shorter."""
    du = _dist(u, tid, cnt)
    if du == INF:
        return False
    cand = du + weight
    if _dist(v, tid, cnt) > cand:
        v.oi.DistA[tid] = cand
        return True
    return False


def update_sp_tree(node: SnapNode, parent: SnapNode) -> None:
    node.p = parent


def check_neg_cycle(tid: int, cnt: int, chain: List[SnapNode], adjacency: Dict[int, list]) -> bool:
    """True iff some collected edge can still be relaxed."""
    for sn in chain:
        u = sn.n
        du = _dist(u, tid, cnt)
        if du == INF:
            continue
        for adjn, w in adjacency.get(id(u), ()):
            if _dist(adjn, tid, cnt) > du + w:
                return True
    return False


def sp_tree_collect(graph, v: VertexNode, tid: int) -> Collect:
    """Relaxation-gated BFS collect followed by queue-driven relaxation.

    The BFS pass visits every reachable vertex (the first relaxation into an
    unvisited vertex always succeeds) and records each vertex's out-edges
    once. Improvements are then pushed along those recorded edges until
    nothing changes or some vertex has been re-queued more than |chain|
    times, so every distance comes from a single read of the graph. The
    final probe decides whether a negative cycle is reachable.
    """
    cnt = next_count(graph, tid)
    v.oi.VisA[tid] = cnt
    v.oi.DistA[tid] = 0.0
    root = SnapNode(v, None, v.oi.ecnt.value)
    chain = [root]
    index = {id(v): root}
    adjacency: Dict[int, list] = {}
    que = deque([root])
    while que:
        cvn = que.popleft()
        u = cvn.n
        if u.marked:
            continue
        out = []
        du = u.oi.DistA[tid]
        for rec in out_edges(u.enxt):
            adjn = rec.ptv
            a = adjn.oi
            w = rec.weight
            out.append((adjn, w))
            cand = du + w
            if a.VisA[tid] != cnt:
                a.VisA[tid] = cnt
                a.DistA[tid] = cand
                sn = SnapNode(adjn, cvn, a.ecnt.value)
                chain.append(sn)
                index[id(adjn)] = sn
                que.append(sn)
            elif cand < a.DistA[tid]:
                a.DistA[tid] = cand
                update_sp_tree(index[id(adjn)], cvn)
        adjacency[id(u)] = out

    limit = len(chain)
    pushes: Dict[int, int] = {}
    work = deque(chain)
    queued = {id(sn.n) for sn in chain}
    while work:
        sn = work.popleft()
        u = sn.n
        queued.discard(id(u))
        for adjn, w in adjacency.get(id(u), ()):
            if relax(tid, cnt, u, adjn, w):
                update_sp_tree(index[id(adjn)], sn)
                k = id(adjn)
                if k not in queued:
                    pushes[k] = pushes.get(k, 0) + 1
                    if pushes[k] > limit:
                        work.clear()
                        break
                    queued.add(k)
                    work.append(index[k])
    neg = check_neg_cycle(tid, cnt, chain, adjacency)
    dist = {sn.n.key: _dist(sn.n, tid, cnt) for sn in chain}
    return Collect(link(chain), verdict=neg, extra=dist)


def sssp(graph, key: int, mode: Optional[str] = None, deadline: Optional[float] = None) -> Optional[SpTree]:
    """Shortest distances from ``key``.

    Returns None if the vertex is absent. A reachable negative cycle yields
    an ``SpTree`` with ``neg_cycle=True`` and no distances.
    """
    out = op_query(graph, key, sp_tree_collect, mode, deadline)
    if out is None:
        return None
    collect, stats = out
    if collect.verdict:
        return SpTree(key, True, stats=stats)
    parent = {sn.n.key: (None if sn.p is None else sn.p.n.key) for sn in collect.chain}
    return SpTree(key, False, dict(collect.extra), parent, stats)


# --------------------------------------------------------------------------
# Betweenness centrality


def bc_tree_collect(graph, v: VertexNode, tid: int) -> Collect:
    """BFS collect that also counts shortest paths and records predecessors."""
    cnt = next_count(graph, tid)
    oi = v.oi
    oi.VisA[tid] = cnt
    oi.DistA[tid] = 0
    oi.sigmaA[tid] = 1
    oi.deltaA[tid] = 0.0
    oi.PredlistA[tid] = []
    root = SnapNode(v, None, oi.ecnt.value)
    chain = [root]
    que = deque([root])
    while que:
        cvn = que.popleft()
        u = cvn.n
        if u.marked:
            continue
        du = u.oi.DistA[tid]
        for rec in out_edges(u.enxt):
            adjn = rec.ptv
            if adjn.marked:
                continue
            a = adjn.oi
            if not chk_visit(adjn, tid, cnt):
                a.VisA[tid] = cnt
                a.DistA[tid] = du + 1
                a.sigmaA[tid] = 0
                a.deltaA[tid] = 0.0
                a.PredlistA[tid] = []
                sn = SnapNode(adjn, cvn, a.ecnt.value)
                chain.append(sn)
                que.append(sn)
            if a.DistA[tid] == du + 1:
                a.sigmaA[tid] += u.oi.sigmaA[tid]
                a.PredlistA[tid].append(u)
    return Collect(link(chain))


def _accumulate(chain: List[SnapNode], tid: int) -> Dict[int, float]:
    """Back-propagate one-sided dependencies in reverse visit order."""
    for sn in reversed(chain):
        w = sn.n.oi
        coeff = (1.0 + w.deltaA[tid]) / w.sigmaA[tid]
        for p in w.PredlistA[tid]:
            p.oi.deltaA[tid] += p.oi.sigmaA[tid] * coeff
    return {sn.n.key: sn.n.oi.deltaA[tid] for sn in chain}


def bc_single_source(graph, s: int, mode: Optional[str] = None, deadline: Optional[float] = None) -> Optional[BcResult]:
    """Dependencies of source ``s`` on every vertex it reaches."""
    out = op_query(graph, s, bc_tree_collect, mode, deadline)
    if out is None:
        return None
    collect, stats = out
    tid = graph.tid()
    dep = _accumulate(collect.chain, tid)
    sigma = {sn.n.key: sn.n.oi.sigmaA[tid] for sn in collect.chain}
    return BcResult(s, dep, sigma, stats)


def bc_all(graph, mode: Optional[str] = None, deadline: Optional[float] = None) -> Dict[int, float]:
    """Centrality of every vertex, one validated pass per source.

    Also leaves each vertex's total in its ``CbA`` slot for this thread.
    """
    tid = graph.tid()
    sources = sorted(graph.store.nodes(), key=lambda n: n.key)
    for n in sources:
        n.oi.CbA[tid] = 0.0
    total: Dict[int, float] = {n.key: 0.0 for n in sources}
    for n in sources:
        res = bc_single_source(graph, n.key, mode, deadline)
        if res is None:
            continue
        for k, d in res.dependency.items():
            if k != n.key:
                total[k] = total.get(k, 0.0) + d
    for n in sources:
        n.oi.CbA[tid] = total.get(n.key, 0.0)
    return total


def bc(graph, key: int, mode: Optional[str] = None, deadline: Optional[float] = None) -> Optional[float]:
    """Betweenness centrality of ``key`` aggregated over all sources."""
    v = graph.vertex_node(key)
    if v is None:
        return None
    return bc_all(graph, mode, deadline).get(key, 0.0)
