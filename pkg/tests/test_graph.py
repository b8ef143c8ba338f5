import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbgraph import Graph, ThreadCapacityError
from nbgraph import oracle as O

from conftest import make_graph, run_threads

INF = math.inf


def test_vertex_basics():
    g = Graph()
    assert g.put_vertex(5)
    assert not g.put_vertex(5)
    assert g.get_vertex(5)
    assert not g.remove_vertex(6)
    assert g.remove_vertex(5)
    assert not g.get_vertex(5)


def test_put_edge_four_cases():
    g = make_graph(3)
    assert g.put_edge(1, 2, 3.0) == (True, INF)
    assert g.put_edge(1, 2, 3.0) == (False, 3.0)
    assert g.put_edge(1, 2, 4.5) == (True, 3.0)
    assert g.put_edge(1, 9, 1.0) == (False, INF)


def test_remove_and_get_edge():
    g = make_graph(3, [(0, 1, 2.5)])
    assert g.get_edge(0, 1) == (True, 2.5)
    assert g.get_edge(1, 0) == (False, INF)
    assert g.remove_edge(0, 1) == (True, 2.5)
    assert g.remove_edge(0, 1) == (False, INF)
    assert g.remove_edge(0, 7) == (False, INF)


def test_self_loops_rejected():
    g = make_graph(2)
    assert g.put_edge(1, 1, 1.0) == (False, INF)
    assert g.get_edge(1, 1) == (False, INF)


@pytest.mark.parametrize("w", [math.nan, math.inf, -math.inf])
def test_non_finite_weight_rejected(w):
    with pytest.raises(ValueError):
        make_graph(2).put_edge(0, 1, w)


def test_removed_vertex_takes_its_edges():
    g = make_graph(7)
    assert g.put_edge(5, 6, 1.0)[0]
    assert g.remove_vertex(6)
    assert g.get_edge(5, 6) == (False, INF)
    g.put_vertex(6)
    assert g.get_edge(5, 6) == (False, INF)
    assert g.put_edge(5, 6, 2.0) == (True, INF)


def test_readd_vertex_restarts_ecnt():
    g = make_graph(3, [(1, 2, 1.0), (1, 0, 1.0)])
    assert g.ecnt(1) == 2
    g.remove_vertex(1)
    g.put_vertex(1)
    assert g.ecnt(1) == 0


def test_con_v_plus():
    g = make_graph(3)
    u, v, ok = g.con_v_plus(1, 2)
    assert ok and (u.key, v.key) == (1, 2)
    assert not g.con_v_plus(1, 9)[2]
    assert not g.con_v_plus(8, 9)[2]


def test_thread_slots_are_bounded_and_reusable():
    g = Graph(capacity=2)
    g.register_thread()
    got = []

    def grab():
        got.append(g.register_thread())
        g.release_thread()

    run_threads([grab])
    run_threads([grab])  # the released slot is reused
    assert got == [1, 1]

    def hold():
        g.register_thread()

    run_threads([hold])  # never released
    with pytest.raises(ThreadCapacityError):
        run_threads([hold])


op_seq = st.lists(
    st.tuples(
        st.sampled_from(["put_vertex", "remove_vertex", "get_vertex", "put_edge", "remove_edge", "get_edge"]),
        st.integers(0, 7),
        st.integers(0, 7),
        st.integers(1, 4),
    ),
    max_size=150,
)


def _args(op, a, b, w):
    if op.endswith("vertex"):
        return (a,)
    if op == "put_edge":
        return (a, b, float(w))
    return (a, b)


@settings(max_examples=300, deadline=None)
@given(op_seq)
def test_matches_sequential_oracle_and_ecnt_is_exact(seq):
    g = Graph()
    ref = {}
    ecnt = {}
    for op, a, b, w in seq:
        args = _args(op, a, b, w)
        got = O.canonical(op, getattr(g, op)(*args))
        assert got == O.seq_apply(ref, op, args), (op, args)
        if op == "put_vertex" and got:
            ecnt[a] = 0
        elif op in ("put_edge", "remove_edge") and got[0]:
            ecnt[a] += 1
    assert g.vertices() == sorted(ref)
    assert sorted(g.edges()) == sorted((s, d, w) for s, adj in ref.items() for d, w in adj.items())
    for v in ref:
        assert g.ecnt(v) == ecnt[v]
    g.check_invariants()


def test_concurrent_mixed_run_keeps_invariants(fast_switch):
    g = make_graph(16, [(i, (i * 7 + 3) % 16, 1.0) for i in range(16)])

    def worker(seed):
        rnd = random.Random(seed)
        for _ in range(600):
            op = rnd.choice(["put_vertex", "remove_vertex", "put_edge", "remove_edge", "get_edge", "bfs"])
            a, b = rnd.randrange(20), rnd.randrange(20)
            if op in ("put_vertex", "remove_vertex", "bfs"):
                getattr(g, op)(a)
            elif op == "put_edge":
                g.put_edge(a, b, float(rnd.randint(1, 4)))
            else:
                getattr(g, op)(a, b)

    run_threads([lambda s=s: worker(s) for s in range(6)])
    g.check_invariants()
    ref = O.seq_graph(g.vertices(), g.edges())
    for v in g.vertices():
        assert O.canonical("bfs", g.bfs(v)) == O.seq_apply(ref, "bfs", (v,))
