import math

import pytest

from nbgraph import oracle as O
from nbgraph.oracle import Event, History, Operation, check_linearizable

INF = math.inf


def test_put_edge_missing_vertex():
    g = O.seq_graph([1])
    assert O.seq_apply(g, "put_edge", (1, 2, 1.0)) == (False, INF)


def test_remove_edge_present():
    g = O.seq_graph([1, 2], [(1, 2, 2.5)])
    assert O.seq_apply(g, "remove_edge", (1, 2)) == (True, 2.5)
    assert g == {1: {}, 2: {}}


def test_remove_vertex_drops_incoming_edges():
    g = O.seq_graph([1, 2], [(1, 2, 1.0)])
    O.seq_apply(g, "remove_vertex", (2,))
    assert g == {1: {}}


def test_sssp_negative_cycle_flag():
    g = O.seq_graph([1, 2], [(1, 2, 1.0), (2, 1, -3.0)])
    assert O.seq_apply(g, "sssp", (1,)) == O.NEG_CYCLE


def test_unknown_op():
    with pytest.raises(ValueError):
        O.seq_apply({}, "frobnicate", ())


def test_brute_bc_examples():
    path = O.seq_graph("abc", [("a", "b", 1), ("b", "c", 1)])
    assert O.brute_bc(path, "b") == 1.0
    assert O.brute_bc(O.seq_graph([1]), 1) == 0.0
    k3 = O.seq_graph(range(3), [(a, b, 1) for a in range(3) for b in range(3) if a != b])
    assert all(O.brute_bc(k3, v) == 0.0 for v in range(3))


def test_brute_bc_splits_over_parallel_paths():
    g = O.seq_graph(range(4), [(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)])
    assert O.brute_bc(g, 1) == 0.5


def test_oracle_is_deterministic():
    g = O.seq_graph(range(5), [(0, 1, 1), (1, 2, -1), (0, 3, 4), (3, 4, 1)])
    assert O.bellman_ford(g, 0) == O.bellman_ford(O.copy_graph(g), 0)
    assert O.brute_bfs(g, 0) == O.brute_bfs(g, 0)


def op(tid, name, args, inv, resp, ret):
    return Operation(tid, name, args, inv, resp, ret)


def test_sequential_history_is_linearizable():
    h = [
        op(0, "put_vertex", (5,), 0, 1, True),
        op(1, "put_vertex", (5,), 2, 3, False),
        op(0, "get_vertex", (5,), 4, 5, True),
    ]
    assert check_linearizable(h)


def test_overlapping_double_add_is_rejected():
    h = [op(0, "put_vertex", (5,), 0, 2, True), op(1, "put_vertex", (5,), 1, 3, True)]
    res = check_linearizable(h)
    assert not res
    assert "put_vertex(5)" in res.failure


def test_overlap_allows_either_order():
    h = [
        op(0, "put_vertex", (1,), 0, 3, True),
        op(1, "get_vertex", (1,), 1, 2, False),
    ]
    assert check_linearizable(h)
    h[1] = op(1, "get_vertex", (1,), 1, 2, True)
    assert check_linearizable(h)


def test_real_time_order_is_respected():
    h = [
        op(0, "put_vertex", (1,), 0, 1, True),
        op(1, "get_vertex", (1,), 2, 3, False),  # starts after the add returned
    ]
    assert not check_linearizable(h)


def test_pending_operation_may_or_may_not_apply():
    h = [op(0, "put_vertex", (1,), 0, None, None), op(1, "get_vertex", (1,), 1, 2, True)]
    assert check_linearizable(h)
    h[1] = op(1, "get_vertex", (1,), 1, 2, False)
    assert check_linearizable(h)


def test_initial_state_is_used():
    h = [op(0, "put_vertex", (1,), 0, 1, False)]
    assert not check_linearizable(h)
    assert check_linearizable(h, O.seq_graph([1]))


def test_size_bound():
    h = [op(0, "get_vertex", (1,), 2 * i, 2 * i + 1, False) for i in range(21)]
    with pytest.raises(ValueError):
        check_linearizable(h)


def test_history_recording_and_log_format():
    h = History()
    g = O.seq_graph()
    h.call(3, "put_vertex", lambda v: O.seq_apply(g, "put_vertex", (v,)), 7)
    lines = h.dump().splitlines()
    assert lines == ["0\t3\tI\tput_vertex\t7\t", "1\t3\tR\tput_vertex\t7\tTrue"]
    ops = h.operations()
    assert len(ops) == 1 and ops[0].inv == 0 and ops[0].resp == 1 and ops[0].ret is True


def test_history_rejects_overlapping_calls_on_one_thread():
    h = History()
    h.events = [Event(0, 1, "I", "get_vertex", (1,)), Event(1, 1, "I", "get_vertex", (2,))]
    with pytest.raises(ValueError):
        h.operations()
