import sys
import threading

import pytest

from nbgraph import Graph


@pytest.fixture
def fast_switch():
    """Make the interpreter switch threads very often so races actually happen."""
    old = sys.getswitchinterval()
    sys.setswitchinterval(1e-6)
    try:
        yield
    finally:
        sys.setswitchinterval(old)


def make_graph(n=0, edges=(), **kw):
    g = Graph(**kw)
    g.load_edges(n, edges)
    return g


def run_threads(fns, timeout=60.0):
    """Start one thread per callable, join them and re-raise the first error."""
    errors = []

    def wrap(fn):
        def body():
            try:
                fn()
            except BaseException as e:
                errors.append(e)

        return body

    threads = [threading.Thread(target=wrap(f), name=f"t{i}") for i, f in enumerate(fns)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout)
        assert not t.is_alive(), f"{t.name} did not finish within {timeout}s"
    if errors:
        raise errors[0]
