"""Per-vertex lock-free internal BST of outgoing edges.

The tree hangs off a sentinel root (key -inf) and lives in ``root.right``.
Structural changes go through operation descriptors published in a node's
``op`` word: ``CHILDCAS`` swings one child pointer, ``RELOCATE`` moves the
successor key into a node with two children that is being removed, and
``MARKED`` retires a node with at most one child. Any thread that meets a
flagged word finishes the operation before continuing.

An edge's key, weight and destination vertex live together in an immutable
``EdgeVal`` record held in ``node.val``. The record's ``state`` carries the
logical status of the edge:

* ``LIVE``: present.
* ``REMOVED``: logically deleted. Installing it is the removal's
  linearization point.
* ``MOVING``: the key is being copied into an ancestor by a relocation and
  its weight is pinned until the copy lands.

Weight updates CAS a ``LIVE`` record into a new ``LIVE`` record, so an
update can never land on a record that is retired or in flight.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterator, List, Optional, Tuple

from .atomic import cas, checkpoint, vcas

NONE, MARKED, CHILDCAS, RELOCATE = 0, 1, 2, 3
FLAG_NAMES = ("NONE", "MARKED", "CHILDCAS", "RELOCATE")

LIVE, REMOVED, MOVING = "live", "removed", "moving"


class OpWord:
    """A tagged descriptor reference: the ``op`` field of an edge node.

    Words are interned per (descriptor, flag) so identity comparison stands
    in for comparing the packed machine word.
    """

    __slots__ = ("flag", "desc")

    def __init__(self, flag: int, desc: Any) -> None:
        self.flag = flag
        self.desc = desc

    def __repr__(self) -> str:
        return f"<{FLAG_NAMES[self.flag]} {type(self.desc).__name__ if self.desc else '-'}>"


_NULL_DESC_WORDS = tuple(OpWord(f, None) for f in range(4))
NONE_WORD = _NULL_DESC_WORDS[NONE]


class _Descriptor:
    __slots__ = ("words",)

    def __init__(self) -> None:
        self.words = tuple(OpWord(f, self) for f in range(4))

    def word(self, flag: int) -> OpWord:
        return self.words[flag]


def flag_word(word: OpWord, flag: int) -> OpWord:
    """Same descriptor as ``word``, different flag."""
    if word.desc is None:
        return _NULL_DESC_WORDS[flag]
    return word.desc.words[flag]


class NullRef:
    """A null child pointer that remembers which node it was cut from."""

    __slots__ = ("owner",)

    def __init__(self, owner: Optional["EdgeNode"]) -> None:
        self.owner = owner

    def __repr__(self) -> str:
        return "NullRef"


def is_null(ref: Any) -> bool:
    return ref is None or type(ref) is NullRef


class EdgeVal:
    __slots__ = ("key", "weight", "ptv", "state", "reloc")

    def __init__(self, key, weight: float, ptv, state: str = LIVE, reloc=None) -> None:
        self.key = key
        self.weight = weight
        self.ptv = ptv
        self.state = state
        self.reloc = reloc

    def retired(self, state: str, reloc=None) -> "EdgeVal":
        return EdgeVal(self.key, self.weight, self.ptv, state, reloc)

    def __repr__(self) -> str:
        return f"EdgeVal({self.key}, {self.weight}, {self.state})"


class EdgeNode:
    __slots__ = ("val", "op", "left", "right")

    def __init__(self, val: EdgeVal) -> None:
        self.val = val
        self.op = NONE_WORD
        self.left: Any = NullRef(self)
        self.right: Any = NullRef(self)

    @property
    def key(self):
        return self.val.key

    @property
    def weight(self) -> float:
        return self.val.weight

    @property
    def ptv(self):
        return self.val.ptv

    def __repr__(self) -> str:
        return f"EdgeNode({self.val.key}, {self.val.weight}, {FLAG_NAMES[self.op.flag]})"


def new_root() -> EdgeNode:
    return EdgeNode(EdgeVal(-math.inf, math.nan, None))


class ChildCASOp(_Descriptor):
    __slots__ = ("is_left", "expected", "update")

    def __init__(self, is_left: bool, expected: Any, update: Any) -> None:
        super().__init__()
        self.is_left = is_left
        self.expected = expected
        self.update = update


class RelocState(enum.Enum):
    ONGOING = "ongoing"
    SUCCESSFUL = "successful"
    FAILED = "failed"


class RelocateOp(_Descriptor):
    __slots__ = ("state", "dest", "dest_op", "remove_key", "replace_key", "replace", "removed")

    def __init__(self, dest: EdgeNode, dest_op: OpWord, remove_key, replace_key, replace: EdgeNode) -> None:
        super().__init__()
        self.state = RelocState.ONGOING
        self.dest = dest
        self.dest_op = dest_op
        self.remove_key = remove_key
        self.replace_key = replace_key
        self.replace = replace
        # The retired record of the removed key, published before the swap.
        self.removed: Optional[EdgeVal] = None

    def swapped(self) -> bool:
        d = self.dest.val
        if d.state is REMOVED and d.reloc is self:
            return False
        return not (d.state is LIVE and d.key == self.remove_key)


class FindStatus(enum.Enum):
    FOUND = "found"
    NOTFOUND_L = "notfound_l"
    NOTFOUND_R = "notfound_r"
    ABORT = "abort"


@dataclass
class FindResult:
    status: FindStatus
    pred: Optional[EdgeNode]
    pred_op: Optional[OpWord]
    curr: EdgeNode
    curr_op: OpWord


# --------------------------------------------------------------------------
# Helping


def help_child_cas(op: ChildCASOp, dest: EdgeNode) -> None:
    cas(dest, "left" if op.is_left else "right", op.expected, op.update)
    cas(dest, "op", op.word(CHILDCAS), op.word(NONE))


def retire(node: EdgeNode) -> EdgeVal:
    """Freeze a marked node's live record as removed; return the final record."""
    while True:
        r = node.val
        if r.state is not LIVE:
            return r
        checkpoint("retire.before_cas")
        cas(node, "val", r, r.retired(REMOVED))


def help_marked(pred: EdgeNode, pred_op: OpWord, curr: EdgeNode) -> None:
    retire(curr)
    if is_null(curr.left):
        new_ref = curr.right if not is_null(curr.right) else NullRef(curr)
    else:
        new_ref = curr.left
    cas_op = ChildCASOp(curr is pred.left, curr, new_ref)
    if cas(pred, "op", pred_op, cas_op.word(CHILDCAS)):
        help_child_cas(cas_op, pred)


def _move_payload(op: RelocateOp) -> None:
    replace = op.replace
    while True:
        r = replace.val
        if r.state is MOVING:
            break
        cas(replace, "val", r, r.retired(MOVING, op))
    moved = replace.val
    dest = op.dest
    while True:
        d = dest.val
        if d.state is REMOVED and d.reloc is op:
            cas(op, "removed", None, d)
            checkpoint("relocate.before_swap")
            cas(dest, "val", d, EdgeVal(moved.key, moved.weight, moved.ptv, LIVE))
            return
        if d.state is LIVE and d.key == op.remove_key:
            cas(dest, "val", d, d.retired(REMOVED, op))
            continue
        return


def help_relocate(op: RelocateOp, pred: EdgeNode, pred_op: OpWord, curr: EdgeNode) -> bool:
    seen_state = op.state
    if seen_state is RelocState.ONGOING:
        seen_op = vcas(op.dest, "op", op.dest_op, op.word(RELOCATE))
        if seen_op is op.dest_op or seen_op is op.word(RELOCATE):
            cas(op, "state", RelocState.ONGOING, RelocState.SUCCESSFUL)
            seen_state = RelocState.SUCCESSFUL
        else:
            seen_state = vcas(op, "state", RelocState.ONGOING, RelocState.FAILED)
            if seen_state is RelocState.ONGOING:
                seen_state = RelocState.FAILED
    if seen_state is RelocState.SUCCESSFUL:
        _move_payload(op)
        cas(op.dest, "op", op.word(RELOCATE), op.word(NONE))
    result = seen_state is RelocState.SUCCESSFUL
    if op.dest is curr:
        return result
    cas(curr, "op", op.word(RELOCATE), op.word(MARKED if result else NONE))
    if result:
        if op.dest is pred:
            pred_op = op.word(NONE)
        help_marked(pred, pred_op, curr)
    return result


def help(pred: EdgeNode, pred_op: OpWord, curr: EdgeNode, curr_op: OpWord) -> None:
    flag = curr_op.flag
    if flag == CHILDCAS:
        help_child_cas(curr_op.desc, curr)
    elif flag == RELOCATE:
        help_relocate(curr_op.desc, pred, pred_op, curr)
    elif flag == MARKED:
        help_marked(pred, pred_op, curr)


# --------------------------------------------------------------------------
# Search


def find(key, aux_root: EdgeNode, root: EdgeNode) -> FindResult:
    """Locate ``key`` below ``aux_root``, helping any flagged node on the way."""
    while True:
        result = FindStatus.NOTFOUND_R
        curr = aux_root
        curr_op = curr.op
        if curr_op.flag != NONE:
            if aux_root is root:
                help_child_cas(curr_op.desc, curr)
                continue
            return FindResult(FindStatus.ABORT, None, None, curr, curr_op)
        nxt = curr.right
        last_right, last_right_op = curr, curr_op
        pred = pred_op = None
        retry = False
        while not is_null(nxt):
            pred, pred_op = curr, curr_op
            curr = nxt
            curr_op = curr.op
            if curr_op.flag != NONE:
                help(pred, pred_op, curr, curr_op)
                retry = True
                break
            curr_key = curr.val.key
            if key < curr_key:
                result = FindStatus.NOTFOUND_L
                nxt = curr.left
            elif key > curr_key:
                result = FindStatus.NOTFOUND_R
                nxt = curr.right
                last_right, last_right_op = curr, curr_op
            else:
                result = FindStatus.FOUND
                break
        if retry:
            continue
        if result is not FindStatus.FOUND and last_right_op is not last_right.op:
            continue
        if curr.op is not curr_op:
            continue
        return FindResult(result, pred, pred_op, curr, curr_op)


_RETRY = object()


def visible(node: EdgeNode) -> Optional[EdgeVal]:
    """The record a reader should report for ``node``, or None if absent.

    May return ``_RETRY`` when the node's key has already been copied into
    an ancestor; the caller then restarts from the root.
    """
    r = node.val
    if r.state is LIVE:
        return r
    if r.state is MOVING:
        return _RETRY if r.reloc.swapped() else r
    return None


def lookup(key, root: EdgeNode) -> Optional[EdgeVal]:
    """Read-only search. Never helps; restarts if it raced a relocation."""
    while True:
        curr, curr_op = root, root.op
        nxt = curr.right
        last_right, last_right_op = curr, curr_op
        found = None
        while not is_null(nxt):
            curr = nxt
            curr_op = curr.op
            curr_key = curr.val.key
            if key < curr_key:
                nxt = curr.left
            elif key > curr_key:
                nxt = curr.right
                last_right, last_right_op = curr, curr_op
            else:
                found = curr
                break
        if found is None:
            if last_right.op is not last_right_op:
                continue
            return None
        checkpoint("lookup.found")
        r = visible(found)
        if r is _RETRY:
            continue
        return r


def iter_edges(root: EdgeNode) -> Iterator[Tuple[EdgeNode, EdgeVal]]:
    """In-order walk with an explicit stack, yielding present edges.

    Edges whose destination vertex is dead are skipped. Under concurrent
    updates the result is not atomic; callers validate by double collect.
    """
    stack = []
    node = root.right
    while stack or not is_null(node):
        while not is_null(node):
            stack.append(node)
            node = node.left
        node = stack.pop()
        r = visible(node)
        if r is not None and r is not _RETRY and not r.ptv.marked:
            yield node, r
        node = node.right


def out_edges(root: EdgeNode) -> List[EdgeVal]:
    """Present edge records in key order; the inlined form of ``iter_edges``.

    Query collects call this once per visited vertex, so it avoids the
    generator and helper-call overhead.
    """
    out = []
    stack = []
    push, pop = stack.append, stack.pop
    node = root.right
    while True:
        while node is not None and type(node) is not NullRef:
            push(node)
            node = node.left
        if not stack:
            return out
        node = pop()
        r = node.val
        st = r.state
        if (st is LIVE or (st is MOVING and not r.reloc.swapped())) and not r.ptv.marked:
            out.append(r)
        node = node.right


# --------------------------------------------------------------------------
# Updates


class Outcome(enum.Enum):
    INSERTED = "inserted"
    UPDATED = "updated"
    UNCHANGED = "unchanged"
    REMOVED = "removed"
    NOT_FOUND = "not_found"
    DEAD_VERTEX = "dead_vertex"


def insert_or_update(
    key,
    weight: float,
    dest_vertex,
    root: EdgeNode,
    owner,
) -> Tuple[Outcome, float]:
    """Insert edge ``key`` or change its weight.

    ``owner`` is the source vertex; its ``oi.ecnt`` is bumped once per
    successful insert or update. Returns the outcome and the previous weight
    (``inf`` when there was none).
    """
    while True:
        if owner.marked or dest_vertex.marked:
            return Outcome.DEAD_VERTEX, math.inf
        fr = find(key, root, root)
        curr = fr.curr
        if fr.status is FindStatus.FOUND:
            r = curr.val
            if r.state is not LIVE or r.key != key:
                continue
            if r.ptv is not dest_vertex and not r.ptv.marked:
                continue
            if r.ptv.marked:
                # Stale edge to a dead vertex: revive it as a fresh insert.
                checkpoint("insert.before_revive")
                if cas(curr, "val", r, EdgeVal(key, weight, dest_vertex, LIVE)):
                    owner.oi.ecnt.fetch_add(1)
                    return Outcome.INSERTED, math.inf
                continue
            if r.weight == weight:
                return Outcome.UNCHANGED, weight
            checkpoint("update.before_cas")
            if cas(curr, "val", r, EdgeVal(key, weight, dest_vertex, LIVE)):
                owner.oi.ecnt.fetch_add(1)
                return Outcome.UPDATED, r.weight
            continue
        is_left = fr.status is FindStatus.NOTFOUND_L
        old = curr.left if is_left else curr.right
        new = EdgeNode(EdgeVal(key, weight, dest_vertex, LIVE))
        cas_op = ChildCASOp(is_left, old, new)
        checkpoint("insert.before_flag")
        if cas(curr, "op", fr.curr_op, cas_op.word(CHILDCAS)):
            owner.oi.ecnt.fetch_add(1)
            help_child_cas(cas_op, curr)
            return Outcome.INSERTED, math.inf


def remove(key, root: EdgeNode, owner) -> Tuple[Outcome, float]:
    """Remove edge ``key``; returns the removed weight or ``inf``."""
    while True:
        if owner.marked:
            return Outcome.DEAD_VERTEX, math.inf
        fr = find(key, root, root)
        if fr.status is not FindStatus.FOUND:
            return Outcome.NOT_FOUND, math.inf
        curr = fr.curr
        r = curr.val
        if r.state is not LIVE:
            continue
        if r.ptv.marked:
            return Outcome.NOT_FOUND, math.inf
        if is_null(curr.left) or is_null(curr.right):
            checkpoint("remove.before_mark")
            if cas(curr, "op", fr.curr_op, flag_word(fr.curr_op, MARKED)):
                gone = retire(curr)
                owner.oi.ecnt.fetch_add(1)
                help_marked(fr.pred, fr.pred_op, curr)
                return Outcome.REMOVED, gone.weight
        else:
            fr2 = find(key, curr, root)
            if fr2.status is FindStatus.ABORT or curr.op is not fr.curr_op:
                continue
            replace = fr2.curr
            reloc = RelocateOp(curr, fr.curr_op, key, replace.val.key, replace)
            checkpoint("remove.before_relocate")
            if cas(replace, "op", fr2.curr_op, reloc.word(RELOCATE)):
                if help_relocate(reloc, fr2.pred, fr2.pred_op, replace):
                    owner.oi.ecnt.fetch_add(1)
                    return Outcome.REMOVED, reloc.removed.weight


# --------------------------------------------------------------------------
# Inspection (quiescent use)


def reachable(root: EdgeNode) -> Iterator[EdgeNode]:
    stack = [root.right]
    while stack:
        n = stack.pop()
        if is_null(n):
            continue
        yield n
        stack.append(n.right)
        stack.append(n.left)


def in_order_keys(root: EdgeNode) -> list:
    return [n.val.key for n, _ in iter_edges(root)]


def check_tree(root: EdgeNode) -> None:
    """Assert BST order and that no descriptor is left pending."""
    assert root.op.flag == NONE, f"root carries {FLAG_NAMES[root.op.flag]}"
    keys = []
    stack = []
    node = root.right
    while stack or not is_null(node):
        while not is_null(node):
            stack.append(node)
            node = node.left
        node = stack.pop()
        assert node.op.flag == NONE, f"node {node.val.key} carries {FLAG_NAMES[node.op.flag]}"
        assert node.val.state is LIVE, f"reachable node {node.val.key} is {node.val.state}"
        keys.append(node.val.key)
        node = node.right
    assert all(a < b for a, b in zip(keys, keys[1:])), f"BST order broken: {keys}"
