"""Resizable lock-free hash table of vertices built from freezable sets.

Each bucket holds an ``FSet`` whose ``node`` field points to an immutable
``FSetNode``. Updates replace the whole node by CAS (copy-on-write), and a
bucket is retired during resize by swapping in a node with ``ok=False``;
from then on it never changes, which is what makes it safe to split or merge
into the next table.

Vertex removal is two-step: the vertex node is marked by CAS (the logical
removal) and then dropped from its bucket's member tuple. A marked vertex is
dead everywhere at once, including in any copy made by a concurrent resize.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

from .atomic import AtomicCounter, cas, cas_item, checkpoint
from .edge_tree import new_root

KEY_MIN = -(2**63)
KEY_MAX = 2**63 - 1


class OpItem:
    """Per-vertex anchor for query traversals.

    Every array has one slot per registered thread; slot ``t`` is written
    only by thread ``t``.
    """

    __slots__ = ("ecnt", "VisA", "DistA", "sigmaA", "deltaA", "PredlistA", "CbA")

    def __init__(self, capacity: int) -> None:
        self.ecnt = AtomicCounter()
        self.VisA = [0] * capacity
        self.DistA = [math.inf] * capacity
        self.sigmaA = [0] * capacity
        self.deltaA = [0.0] * capacity
        self.PredlistA: List[list] = [[] for _ in range(capacity)]
        self.CbA = [0.0] * capacity


class VertexNode:
    __slots__ = ("key", "marked", "enxt", "oi", "__weakref__")

    def __init__(self, key: int, capacity: int) -> None:
        self.key = key
        self.marked = False
        self.enxt = new_root()
        self.oi = OpItem(capacity)

    @property
    def alive(self) -> bool:
        return not self.marked

    def __repr__(self) -> str:
        state = "dead" if self.marked else "alive"
        return f"VertexNode({self.key}, {state})"


class FSetNode:
    __slots__ = ("members", "ok")

    def __init__(self, members: Tuple[VertexNode, ...], ok: bool) -> None:
        self.members = members
        self.ok = ok

    def find(self, key: int) -> Optional[VertexNode]:
        for n in self.members:
            if n.key == key and not n.marked:
                return n
            if n.key > key:
                break
        return None


class FSet:
    __slots__ = ("node",)

    def __init__(self, members: Tuple[VertexNode, ...] = (), ok: bool = True) -> None:
        self.node = FSetNode(members, ok)


class OpType(enum.Enum):
    ADD = "add"
    REMOVE = "remove"


@dataclass
class FSetOp:
    op_type: OpType
    key: int
    done: bool = False
    resp: bool = False
    vnode: Optional[VertexNode] = None


class HNode:
    __slots__ = ("buckets", "size", "pred")

    def __init__(self, size: int, pred: Optional["HNode"]) -> None:
        if size < 1 or size & (size - 1):
            raise ValueError(f"table size must be a power of two, got {size}")
        self.buckets: List[Optional[FSet]] = [None] * size
        self.size = size
        self.pred = pred


def _sorted_live(nodes) -> Tuple[VertexNode, ...]:
    return tuple(sorted((n for n in nodes if not n.marked), key=lambda n: n.key))


def freeze(bucket: FSet) -> Tuple[VertexNode, ...]:
    """Make ``bucket`` immutable and return its final members. Idempotent."""
    o = bucket.node
    while o.ok:
        checkpoint("freeze.before_cas")
        if cas(bucket, "node", o, FSetNode(o.members, False)):
            break
        o = bucket.node
    return bucket.node.members


def invoke(bucket: FSet, op: FSetOp) -> bool:
    """Apply ``op`` to a mutable bucket. False means the bucket is frozen."""
    o = bucket.node
    while o.ok:
        if op.op_type is OpType.ADD:
            if o.find(op.key) is not None:
                op.resp = False
                op.done = True
                return True
            members = _sorted_live(o.members + (op.vnode,))
            checkpoint("invoke.before_cas")
            if cas(bucket, "node", o, FSetNode(members, True)):
                op.resp = True
                op.done = True
                return True
        else:
            victim = o.find(op.key)
            if victim is None:
                op.resp = False
                op.done = True
                return True
            checkpoint("invoke.before_mark")
            if cas(victim, "marked", False, True):
                op.resp = True
                op.done = True
                _unlink(bucket, victim)
                return True
        o = bucket.node
    return False


def _unlink(bucket: FSet, victim: VertexNode) -> None:
    o = bucket.node
    while o.ok and victim in o.members:
        trimmed = tuple(n for n in o.members if n is not victim)
        if cas(bucket, "node", o, FSetNode(trimmed, True)):
            return
        o = bucket.node


class VertexStore:
    """Hash set of ``VertexNode`` keyed by integer vertex key."""

    def __init__(
        self,
        capacity: int = 64,
        initial_size: int = 16,
        grow_load: float = 4.0,
        shrink_load: float = 0.25,
    ) -> None:
        self.capacity = capacity
        self.grow_load = grow_load
        self.shrink_load = shrink_load
        self.head = HNode(initial_size, None)
        for i in range(initial_size):
            self.head.buckets[i] = FSet()
        self.count = AtomicCounter()
        self.resizes = AtomicCounter()

    # -- bucket plumbing -------------------------------------------------

    def init_bucket(self, t: HNode, i: int) -> FSet:
        if not 0 <= i < t.size:
            raise IndexError(i)
        b = t.buckets[i]
        s = t.pred
        if b is None and s is not None:
            if t.size == s.size * 2:
                m = s.buckets[i % s.size]
                members = tuple(n for n in freeze(m) if n.key % t.size == i)
            else:
                members = freeze(s.buckets[i]) + freeze(s.buckets[i + t.size])
            checkpoint("init_bucket.before_cas")
            cas_item(t.buckets, i, None, FSet(_sorted_live(members), True))
        return t.buckets[i]

    def resize(self, grow: bool) -> None:
        t = self.head
        if t.size > 1 or grow:
            for i in range(t.size):
                self.init_bucket(t, i)
            t.pred = None
            size = t.size * 2 if grow else t.size // 2
            checkpoint("resize.before_cas")
            if cas(self, "head", t, HNode(size, t)):
                self.resizes.fetch_add(1)

    def _apply(self, op: FSetOp) -> bool:
        while True:
            t = self.head
            i = op.key % t.size
            b = t.buckets[i]
            if b is None:
                b = self.init_bucket(t, i)
            if invoke(b, op):
                return op.resp

    # -- public set operations -------------------------------------------

    @staticmethod
    def check_key(key: int) -> None:
        if not isinstance(key, int) or isinstance(key, bool):
            raise TypeError(f"vertex key must be an int, got {type(key).__name__}")
        if not KEY_MIN < key < KEY_MAX:
            raise ValueError(f"vertex key {key} is outside the usable range")

    def add(self, key: int) -> bool:
        self.check_key(key)
        op = FSetOp(OpType.ADD, key, vnode=VertexNode(key, self.capacity))
        resp = self._apply(op)
        if resp:
            n = self.count.fetch_add(1) + 1
            if n > self.grow_load * self.head.size:
                self.resize(True)
        return resp

    def remove(self, key: int) -> bool:
        self.check_key(key)
        resp = self._apply(FSetOp(OpType.REMOVE, key))
        if resp:
            n = self.count.fetch_add(-1) - 1
            size = self.head.size
            if size > 1 and n < self.shrink_load * size:
                self.resize(False)
        return resp

    def contains(self, key: int) -> Tuple[bool, Optional[VertexNode]]:
        t = self.head
        b = t.buckets[key % t.size]
        if b is None:
            checkpoint("contains.bucket_null")
            s = t.pred
            if s is not None:
                b = s.buckets[key % s.size]
            else:
                b = t.buckets[key % t.size]
        node = b.node.find(key)
        return (node is not None, node)

    # -- inspection (quiescent use) --------------------------------------

    def _bucket_members(self, t: HNode, i: int) -> Tuple[VertexNode, ...]:
        b = t.buckets[i]
        if b is not None:
            return b.node.members
        s = t.pred
        if s is None:
            b = t.buckets[i]
            return b.node.members if b is not None else ()
        if t.size == s.size * 2:
            return tuple(n for n in s.buckets[i % s.size].node.members if n.key % t.size == i)
        return s.buckets[i].node.members + s.buckets[i + t.size].node.members

    def nodes(self) -> Iterator[VertexNode]:
        """Alive vertex nodes, bucket by bucket. Not atomic."""
        t = self.head
        for i in range(t.size):
            for n in self._bucket_members(t, i):
                if not n.marked:
                    yield n

    def keys(self) -> List[int]:
        return sorted(n.key for n in self.nodes())

    def check_invariants(self) -> None:
        """Raise AssertionError if a structural invariant is broken."""
        t = self.head
        assert t.size >= 1 and t.size & (t.size - 1) == 0
        if t.pred is not None:
            assert t.pred.pred is None, "more than two live HNodes"
            assert t.size in (t.pred.size * 2, t.pred.size // 2)
        seen = set()
        for i in range(t.size):
            members = [n for n in self._bucket_members(t, i) if not n.marked]
            ks = [n.key for n in members]
            assert ks == sorted(ks) and len(set(ks)) == len(ks), f"bucket {i} unsorted or duplicated"
            for k in ks:
                assert k % t.size == i, f"key {k} in wrong bucket {i}"
                assert k not in seen
                seen.add(k)
