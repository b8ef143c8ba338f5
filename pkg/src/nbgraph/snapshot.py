"""Partial-snapshot collection with double-collect validation.

A query collects the part of the graph reachable from its source, then
collects again, and accepts once two consecutive collects agree vertex by
vertex: same vertex nodes, same BFS parents, same ``ecnt`` stamps. The
per-vertex ``ecnt`` counter moves on every edge add, remove or reweight, so
matching stamps mean the out-edges seen in both collects were undisturbed.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, List, Optional

from .atomic import checkpoint
from .edge_tree import out_edges
from .vertex_store import VertexNode


class StarvationError(RuntimeError):
    """A linearizable scan kept failing validation past its deadline."""


class SnapNode:
    __slots__ = ("n", "p", "nxt", "ecnt")

    def __init__(self, n: VertexNode, p: Optional["SnapNode"], ecnt: int) -> None:
        self.n = n
        self.p = p
        self.nxt: Optional[SnapNode] = None
        self.ecnt = ecnt

    def __repr__(self) -> str:
        parent = None if self.p is None else self.p.n.key
        return f"SnapNode({self.n.key}, p={parent}, ecnt={self.ecnt})"


@dataclass
class Collect:
    """Output of one collect: the chain, plus a verdict for SSSP."""

    chain: List[SnapNode]
    verdict: Optional[bool] = None
    extra: object = None


@dataclass
class ScanStats:
    collects: int = 0
    interrupts: int = 0


def link(chain: List[SnapNode]) -> List[SnapNode]:
    for a, b in zip(chain, chain[1:]):
        a.nxt = b
    return chain


def chk_visit(vertex: VertexNode, tid: int, cnt: int) -> bool:
    return vertex.oi.VisA[tid] == cnt


def next_count(graph, tid: int) -> int:
    graph.cnt[tid] += 1
    return graph.cnt[tid]


def cmp_tree(old: Optional[List[SnapNode]], new: Optional[List[SnapNode]]) -> bool:
    """Element-wise equality on vertex identity, parent vertex and stamp."""
    if old is None or new is None or len(old) != len(new):
        return False
    for a, b in zip(old, new):
        if a.n is not b.n or a.ecnt != b.ecnt:
            return False
        pa = None if a.p is None else a.p.n
        pb = None if b.p is None else b.p.n
        if pa is not pb:
            return False
    return True


def tree_collect(graph, v: VertexNode, tid: int) -> Collect:
    """Breadth-first collect of the vertices reachable from ``v``."""
    cnt = next_count(graph, tid)
    v.oi.VisA[tid] = cnt
    root = SnapNode(v, None, v.oi.ecnt.value)
    chain = [root]
    que = deque([root])
    while que:
        cvn = que.popleft()
        if cvn.n.marked:
            continue
        for rec in out_edges(cvn.n.enxt):
            oi = rec.ptv.oi
            if oi.VisA[tid] == cnt:
                continue
            oi.VisA[tid] = cnt
            sn = SnapNode(rec.ptv, cvn, oi.ecnt.value)
            chain.append(sn)
            que.append(sn)
    return Collect(link(chain))


def scan(
    graph,
    v: VertexNode,
    tid: int,
    collect: Callable[[object, VertexNode, int], Collect],
    linearizable: bool = True,
    stats: Optional[ScanStats] = None,
    deadline: Optional[float] = None,
) -> Collect:
    """Repeat ``collect`` until two consecutive results match.

    In single-collect mode the first collect is returned unvalidated.
    """
    stats = stats if stats is not None else ScanStats()
    clock0 = graph.update_clock.value
    old = collect(graph, v, tid)
    stats.collects += 1
    if not linearizable:
        stats.interrupts = graph.update_clock.value - clock0
        return old
    while True:
        checkpoint("scan.between_collects")
        new = collect(graph, v, tid)
        stats.collects += 1
        if old.verdict == new.verdict and cmp_tree(old.chain, new.chain):
            stats.interrupts = graph.update_clock.value - clock0
            return new
        if deadline is not None and time.monotonic() > deadline:
            raise StarvationError(f"scan from {v.key} did not validate after {stats.collects} collects")
        old = new


def op_query(
    graph,
    key: int,
    collect: Callable[[object, VertexNode, int], Collect],
    mode: Optional[str] = None,
    deadline: Optional[float] = None,
):
    """Validate the source, then scan.

    Returns (collect, stats), or None if the source is absent at the start
    or removed by the end.
    """
    st, v = graph.store.contains(key)
    if not st or v.marked:
        return None
    tid = graph.tid()
    stats = ScanStats()
    linearizable = (mode or graph.mode) != "icn"
    result = scan(graph, v, tid, collect, linearizable, stats, deadline)
    if v.marked:
        # removed during the scan; collects skip a marked vertex's edges, so
        # the chain would be just the source
        return None
    return result, stats
