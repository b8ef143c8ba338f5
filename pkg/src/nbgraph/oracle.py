"""Sequential reference graph, brute-force algorithms and a linearizability checker.

Everything here is single-threaded and deliberately naive. The concurrent
implementation is tested by comparing against these functions, so they share
no code with it.
"""

from __future__ import annotations

import itertools
import math
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

INF = math.inf

SeqGraph = Dict[int, Dict[int, float]]
NEG_CYCLE = "neg_cycle"


def seq_graph(vertices: Iterable[int] = (), edges: Iterable[Tuple[int, int, float]] = ()) -> SeqGraph:
    g: SeqGraph = {v: {} for v in vertices}
    for s, d, w in edges:
        if s in g and d in g and s != d:
            g[s][d] = float(w)
    return g


def copy_graph(g: SeqGraph) -> SeqGraph:
    return {v: dict(adj) for v, adj in g.items()}


def freeze_graph(g: SeqGraph) -> FrozenSet:
    return frozenset((v, frozenset(adj.items())) for v, adj in g.items())


# --------------------------------------------------------------------------
# brute-force algorithms


def brute_bfs(g: SeqGraph, s: int) -> Optional[Dict[int, int]]:
    """Hop level of every vertex reachable from ``s``; None if ``s`` is absent."""
    if s not in g:
        return None
    level = {s: 0}
    q = deque([s])
    while q:
        u = q.popleft()
        for w in sorted(g[u]):
            if w not in level:
                level[w] = level[u] + 1
                q.append(w)
    return level


def bellman_ford(g: SeqGraph, s: int):
    """Distances from ``s`` over the reachable part of ``g``.

    Returns None if ``s`` is absent, ``NEG_CYCLE`` if a negative cycle is
    reachable, otherwise a dict of finite distances.
    """
    if s not in g:
        return None
    dist = {v: INF for v in g}
    dist[s] = 0.0
    edges = [(u, w, wt) for u, adj in g.items() for w, wt in adj.items()]
    for _ in range(len(g) - 1):
        changed = False
        for u, w, wt in edges:
            if dist[u] != INF and dist[u] + wt < dist[w]:
                dist[w] = dist[u] + wt
                changed = True
        if not changed:
            break
    for u, w, wt in edges:
        if dist[u] != INF and dist[u] + wt < dist[w]:
            return NEG_CYCLE
    return {v: d for v, d in dist.items() if d != INF}


def _bfs_counts(g: SeqGraph, s: int) -> Tuple[Dict[int, int], Dict[int, int]]:
    dist = {s: 0}
    sigma = {s: 1}
    q = deque([s])
    while q:
        u = q.popleft()
        for w in g[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                sigma[w] = 0
                q.append(w)
            if dist[w] == dist[u] + 1:
                sigma[w] += sigma[u]
    return dist, sigma


def brute_bc(g: SeqGraph, v: int) -> float:
    """Sum over ordered pairs (s, t), s != v != t, of sigma(s,t|v)/sigma(s,t).

    Weights are ignored. sigma(s,t|v) = sigma(s,v)*sigma(v,t) when v lies on
    a shortest s-t path, which is checked by distance additivity.
    """
    if v not in g:
        return 0.0
    counts = {s: _bfs_counts(g, s) for s in g}
    dv, sv = counts[v]
    total = 0.0
    for s in g:
        if s == v:
            continue
        ds, ss = counts[s]
        if v not in ds:
            continue
        for t in g:
            if t == v or t == s or t not in ds or t not in dv:
                continue
            if ds[v] + dv[t] == ds[t]:
                total += ss[v] * sv[t] / ss[t]
    return total


# --------------------------------------------------------------------------
# sequential ADT


def _edge_ret(status: bool, weight: float) -> Tuple[bool, float]:
    return (bool(status), float(weight))


def seq_apply(g: SeqGraph, op: str, args: Sequence[Any]) -> Any:
    """Apply one operation to ``g`` in place and return its canonical result."""
    if op == "put_vertex":
        (v,) = args
        if v in g:
            return False
        g[v] = {}
        return True
    if op == "remove_vertex":
        (v,) = args
        if v not in g:
            return False
        del g[v]
        for adj in g.values():
            adj.pop(v, None)
        return True
    if op == "get_vertex":
        (v,) = args
        return v in g
    if op == "put_edge":
        s, d, w = args
        w = float(w)
        if s == d or s not in g or d not in g:
            return _edge_ret(False, INF)
        old = g[s].get(d)
        g[s][d] = w
        if old is None:
            return _edge_ret(True, INF)
        if old == w:
            return _edge_ret(False, w)
        return _edge_ret(True, old)
    if op == "remove_edge":
        s, d = args
        if s == d or s not in g or d not in g or d not in g[s]:
            return _edge_ret(False, INF)
        return _edge_ret(True, g[s].pop(d))
    if op == "get_edge":
        s, d = args
        if s == d or s not in g or d not in g or d not in g[s]:
            return _edge_ret(False, INF)
        return _edge_ret(True, g[s][d])
    if op == "bfs":
        (s,) = args
        lv = brute_bfs(g, s)
        return None if lv is None else tuple(sorted(lv.items()))
    if op == "sssp":
        (s,) = args
        r = bellman_ford(g, s)
        return r if r is None or r == NEG_CYCLE else tuple(sorted(r.items()))
    if op == "bc":
        (v,) = args
        return None if v not in g else round(brute_bc(g, v), 9)
    raise ValueError(f"unknown operation {op!r}")


def canonical(op: str, ret: Any) -> Any:
    """Map a concurrent-graph return value onto the form ``seq_apply`` uses."""
    if op in ("put_edge", "remove_edge", "get_edge"):
        return _edge_ret(ret[0], ret[1])
    if op == "bfs":
        return None if ret is None else tuple(sorted(ret.level.items()))
    if op == "sssp":
        if ret is None:
            return None
        if ret.neg_cycle:
            return NEG_CYCLE
        return tuple(sorted(ret.dist.items()))
    if op == "bc":
        return None if ret is None else round(ret, 9)
    return ret


# --------------------------------------------------------------------------
# histories


@dataclass(frozen=True)
class Event:
    seq: int
    tid: int
    phase: str
    op: str
    args: Tuple
    ret: Any = None

    def line(self) -> str:
        args = ",".join(repr(a) for a in self.args)
        ret = "" if self.phase == "I" else repr(self.ret)
        return f"{self.seq}\t{self.tid}\t{self.phase}\t{self.op}\t{args}\t{ret}"


@dataclass
class Operation:
    tid: int
    op: str
    args: Tuple
    inv: int
    resp: Optional[int]
    ret: Any

    def __str__(self) -> str:
        args = ", ".join(repr(a) for a in self.args)
        return f"t{self.tid} {self.op}({args}) -> {self.ret!r} [{self.inv}, {self.resp}]"


class History:
    """Thread-safe recorder of invocation and response events."""

    def __init__(self) -> None:
        self.events: List[Event] = []
        self._seq = itertools.count()
        self._lock = threading.Lock()

    def _log(self, tid, phase, op, args, ret=None) -> None:
        with self._lock:
            self.events.append(Event(next(self._seq), tid, phase, op, tuple(args), ret))

    def invoke(self, tid: int, op: str, args: Sequence[Any]) -> None:
        self._log(tid, "I", op, args)

    def respond(self, tid: int, op: str, args: Sequence[Any], ret: Any) -> None:
        self._log(tid, "R", op, args, ret)

    def call(self, tid: int, op: str, fn: Callable, *args) -> Any:
        self.invoke(tid, op, args)
        ret = fn(*args)
        self.respond(tid, op, args, canonical(op, ret))
        return ret

    def operations(self) -> List[Operation]:
        open_ops: Dict[int, Operation] = {}
        out: List[Operation] = []
        for e in sorted(self.events, key=lambda e: e.seq):
            if e.phase == "I":
                if e.tid in open_ops:
                    raise ValueError(f"thread {e.tid} invoked {e.op} at {e.seq} with an operation pending")
                o = Operation(e.tid, e.op, e.args, e.seq, None, None)
                open_ops[e.tid] = o
                out.append(o)
            else:
                o = open_ops.pop(e.tid, None)
                if o is None or o.op != e.op:
                    raise ValueError(f"response at {e.seq} matches no invocation of thread {e.tid}")
                o.resp = e.seq
                o.ret = e.ret
        return out

    def dump(self) -> str:
        return "".join(e.line() + "\n" for e in sorted(self.events, key=lambda e: e.seq))

    def __len__(self) -> int:
        return len(self.events)


@dataclass
class CheckResult:
    ok: bool
    order: List[Operation] = field(default_factory=list)
    failure: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def check_linearizable(history, initial: Optional[SeqGraph] = None, max_ops: int = 20) -> CheckResult:
    """Search for a real-time-respecting order that replays ``history``.

    Operations still pending at the end of the history may take effect at
    any point after their invocation or not at all; their return value is
    not checked. On failure ``failure`` names the earliest-responding
    operation that could not be placed at the deepest point reached.
    """
    ops = history.operations() if isinstance(history, History) else list(history)
    if len(ops) > max_ops:
        raise ValueError(f"history has {len(ops)} operations; the exhaustive check supports at most {max_ops}")
    n = len(ops)
    start = copy_graph(initial or {})
    completed = frozenset(i for i, o in enumerate(ops) if o.resp is not None)
    seen = set()
    best = {"depth": -1, "stuck": None}

    def candidates(done: FrozenSet[int]) -> List[int]:
        rest = [i for i in range(n) if i not in done]
        horizon = min((ops[i].resp for i in rest if ops[i].resp is not None), default=math.inf)
        return [i for i in rest if ops[i].inv < horizon]

    def dfs(g: SeqGraph, done: FrozenSet[int], order: List[int]) -> Optional[List[int]]:
        if completed <= done:
            return order
        key = (freeze_graph(g), done)
        if key in seen:
            return None
        seen.add(key)
        cands = candidates(done)
        for i in cands:
            o = ops[i]
            g2 = copy_graph(g)
            ret = seq_apply(g2, o.op, o.args)
            if o.resp is not None and ret != o.ret:
                continue
            found = dfs(g2, done | {i}, order + [i])
            if found is not None:
                return found
        if len(done) > best["depth"]:
            pending = [i for i in cands if ops[i].resp is not None]
            best["depth"] = len(done)
            best["stuck"] = min(pending, key=lambda i: ops[i].resp) if pending else None
        return None

    found = dfs(start, frozenset(), [])
    if found is not None:
        return CheckResult(True, [ops[i] for i in found])
    stuck = best["stuck"]
    msg = "no linearization found"
    if stuck is not None:
        msg = f"no linearization found; first irreconcilable event: {ops[stuck]} after {best['depth']} placed operations"
    return CheckResult(False, failure=msg)
