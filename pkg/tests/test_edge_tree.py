import math
import random
import threading

from hypothesis import given, settings
from hypothesis import strategies as st

from nbgraph import edge_tree as et
from nbgraph.atomic import Pauser, interleaving
from nbgraph.vertex_store import VertexNode

from conftest import run_threads


def vertices(n=16):
    return [VertexNode(k, 2) for k in range(n)]


def build(keys, owner=None, vs=None):
    vs = vs or vertices(max(keys, default=0) + 1)
    owner = owner or VertexNode(-1, 2)
    root = owner.enxt
    for k in keys:
        assert et.insert_or_update(k, float(k), vs[k], root, owner)[0] is et.Outcome.INSERTED
    return root, owner, vs


def test_find_reports_pred():
    root, _, _ = build([5, 3, 8])
    fr = et.find(8, root, root)
    assert fr.status is et.FindStatus.FOUND
    assert fr.pred.key == 5


def test_find_not_found_direction():
    root, _, _ = build([5, 3, 8])
    assert et.find(4, root, root).status is et.FindStatus.NOTFOUND_R
    assert et.find(7, root, root).status is et.FindStatus.NOTFOUND_L


def test_two_child_remove_relocates_successor():
    root, owner, _ = build([5, 3, 8, 7, 9])
    slot = root.right
    assert slot.key == 5
    out, w = et.remove(5, root, owner)
    assert out is et.Outcome.REMOVED and w == 5.0
    assert et.in_order_keys(root) == [3, 7, 8, 9]
    assert root.right is slot and slot.key == 7
    et.check_tree(root)


def test_one_child_and_leaf_remove():
    root, owner, _ = build([5, 3, 8, 9])
    assert et.remove(8, root, owner)[0] is et.Outcome.REMOVED
    assert et.remove(3, root, owner)[0] is et.Outcome.REMOVED
    assert et.in_order_keys(root) == [5, 9]
    assert et.remove(3, root, owner) == (et.Outcome.NOT_FOUND, math.inf)
    et.check_tree(root)


def test_help_on_marked_leaf_installs_null_ref():
    root, _, _ = build([5, 3])
    five = root.right
    three = five.left
    three.op = et.flag_word(three.op, et.MARKED)
    et.find(3, root, root)  # meets the mark and helps
    assert et.is_null(five.left)
    assert five.left.owner is three
    assert et.lookup(3, root) is None
    et.check_tree(root)


def test_update_returns_old_weight_and_bumps_ecnt():
    root, owner, vs = build([4])
    assert owner.oi.ecnt.load() == 1
    assert et.insert_or_update(4, 2.5, vs[4], root, owner) == (et.Outcome.UPDATED, 4.0)
    assert et.insert_or_update(4, 2.5, vs[4], root, owner) == (et.Outcome.UNCHANGED, 2.5)
    assert owner.oi.ecnt.load() == 2
    assert et.lookup(4, root).weight == 2.5


def test_edge_to_dead_vertex_is_absent_and_revivable():
    root, owner, vs = build([2])
    vs[2].marked = True
    assert et.out_edges(root) == []
    assert et.remove(2, root, owner)[0] is et.Outcome.NOT_FOUND
    fresh = VertexNode(2, 2)
    assert et.insert_or_update(2, 7.0, fresh, root, owner)[0] is et.Outcome.INSERTED
    assert et.lookup(2, root).ptv is fresh


ops = st.lists(
    st.tuples(st.sampled_from(["put", "rem", "get"]), st.integers(0, 15), st.integers(1, 3)),
    max_size=120,
)


@settings(max_examples=300, deadline=None)
@given(ops)
def test_matches_map_oracle(seq):
    vs = vertices()
    owner = VertexNode(-1, 2)
    root = owner.enxt
    ref = {}
    bumps = 0
    for op, k, w in seq:
        w = float(w)
        if op == "put":
            out, old = et.insert_or_update(k, w, vs[k], root, owner)
            if k not in ref:
                assert (out, old) == (et.Outcome.INSERTED, math.inf)
            elif ref[k] == w:
                assert (out, old) == (et.Outcome.UNCHANGED, w)
            else:
                assert (out, old) == (et.Outcome.UPDATED, ref[k])
            bumps += out is not et.Outcome.UNCHANGED
            ref[k] = w
        elif op == "rem":
            out, old = et.remove(k, root, owner)
            if k in ref:
                assert (out, old) == (et.Outcome.REMOVED, ref.pop(k))
                bumps += 1
            else:
                assert out is et.Outcome.NOT_FOUND
        else:
            r = et.lookup(k, root)
            assert (r.weight if r else None) == ref.get(k)
    assert et.in_order_keys(root) == sorted(ref)
    assert owner.oi.ecnt.load() == bumps
    et.check_tree(root)


def test_concurrent_disjoint_updates(fast_switch):
    vs = vertices(64)
    owner = VertexNode(-1, 8)
    root = owner.enxt
    for k in range(0, 64, 2):
        et.insert_or_update(k, 1.0, vs[k], root, owner)

    def worker(i):
        rnd = random.Random(i)
        mine = [k for k in range(64) if k % 4 == i]
        for _ in range(400):
            k = rnd.choice(mine)
            if rnd.random() < 0.5:
                et.insert_or_update(k, float(rnd.randint(1, 5)), vs[k], root, owner)
            else:
                et.remove(k, root, owner)
        # leave a known final state for this thread's keys
        for k in mine:
            if k % 8 < 4:
                et.insert_or_update(k, float(k), vs[k], root, owner)
            else:
                et.remove(k, root, owner)

    run_threads([lambda i=i: worker(i) for i in range(4)])
    et.check_tree(root)
    assert et.in_order_keys(root) == [k for k in range(64) if k % 8 < 4]
    for k in et.in_order_keys(root):
        assert et.lookup(k, root).weight == float(k)


def test_weight_updates_never_invent_values(fast_switch):
    vs = vertices(2)
    owner = VertexNode(-1, 8)
    root = owner.enxt
    et.insert_or_update(1, 0.0, vs[1], root, owner)
    installed = {0.0}
    reported = []
    lock = threading.Lock()

    def writer(tid):
        for i in range(1, 300):
            w = float(tid * 1000 + i)  # tagged with the writer id
            with lock:
                installed.add(w)
            out, old = et.insert_or_update(1, w, vs[1], root, owner)
            assert out is et.Outcome.UPDATED
            reported.append(old)

    run_threads([lambda t=t: writer(t) for t in range(1, 5)])
    assert set(reported) <= installed
    # every install except the last is reported exactly once as overwritten
    assert len(reported) == len(set(reported))
    assert owner.oi.ecnt.load() == 1 + len(reported)


def test_reader_during_relocation_sees_consistent_keys():
    root, owner, _ = build([5, 3, 8, 7, 9])
    p = Pauser("relocate.before_swap", thread_name="remover")
    result = {}
    with interleaving(p):
        th = threading.Thread(target=lambda: result.update(r=et.remove(5, root, owner)), name="remover")
        th.start()
        assert p.wait_parked()
        # 5 is already logically gone; 7 is still reachable at its old spot
        assert et.lookup(5, root) is None
        assert et.lookup(7, root).weight == 7.0
        assert [r.key for r in et.out_edges(root)] == [3, 7, 8, 9]
        p.release()
        th.join(5)
    assert result["r"] == (et.Outcome.REMOVED, 5.0)
    assert et.lookup(7, root).weight == 7.0
    et.check_tree(root)


def test_update_racing_relocation_of_its_key():
    # Successor 7 is pinned as MOVING; an update to 7 must wait for the move.
    root, owner, vs = build([5, 3, 8, 7, 9])
    p = Pauser("relocate.before_swap", thread_name="remover")
    with interleaving(p):
        rem = threading.Thread(target=lambda: et.remove(5, root, owner), name="remover")
        rem.start()
        assert p.wait_parked()
        upd_result = {}
        upd = threading.Thread(target=lambda: upd_result.update(r=et.insert_or_update(7, 70.0, vs[7], root, owner)))
        upd.start()
        upd.join(5)  # the updater helps finish the relocation, then updates
        p.release()
        rem.join(5)
    assert upd_result["r"] == (et.Outcome.UPDATED, 7.0)
    assert et.lookup(7, root).weight == 70.0
    assert et.in_order_keys(root) == [3, 7, 8, 9]
    et.check_tree(root)
