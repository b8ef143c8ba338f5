"""Single-word atomic primitives for the lock-free structures.

CPython exposes no user-level compare-and-swap, so CAS is emulated with a
small table of striped locks. Each lock is held only for the compare and the
store, which gives the same atomicity as the hardware instruction: nothing
else ever blocks on it and no thread holds it across a call.

Comparison is by identity. Values that must compare by content (operation
words, weight records) are interned or carried in immutable records so that
identity and equality coincide.

The module also hosts the ``checkpoint`` hook used by tests to force
specific interleavings between threads.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from typing import Any, Callable, Iterator, Optional

_N_STRIPES = 512
_STRIPES = tuple(threading.Lock() for _ in range(_N_STRIPES))


def _stripe(obj: object) -> threading.Lock:
    return _STRIPES[(id(obj) >> 4) % _N_STRIPES]


def cas(obj: Any, attr: str, expected: Any, new: Any) -> bool:
    """Set ``obj.attr`` to ``new`` iff it is currently ``expected``."""
    with _stripe(obj):
        if getattr(obj, attr) is expected:
            setattr(obj, attr, new)
            return True
        return False


def vcas(obj: Any, attr: str, expected: Any, new: Any) -> Any:
    """Value-returning CAS: returns the value seen before the attempt."""
    with _stripe(obj):
        seen = getattr(obj, attr)
        if seen is expected:
            setattr(obj, attr, new)
        return seen


def cas_item(arr: list, index: int, expected: Any, new: Any) -> bool:
    with _stripe(arr):
        if arr[index] is expected:
            arr[index] = new
            return True
        return False


class AtomicCounter:
    """Monotone counter with fetch-and-add; reads are plain loads."""

    __slots__ = ("value",)

    def __init__(self, initial: int = 0) -> None:
        self.value = initial

    def fetch_add(self, delta: int = 1) -> int:
        with _stripe(self):
            old = self.value
            self.value = old + delta
            return old

    def load(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"AtomicCounter({self.value})"


# --------------------------------------------------------------------------
# Interleaving hooks

_hook: Optional[Callable[[str], None]] = None


def checkpoint(name: str) -> None:
    """Named scheduling point; a no-op unless a test installed a hook."""
    hook = _hook
    if hook is not None:
        hook(name)


@contextmanager
def interleaving(hook: Callable[[str], None]) -> Iterator[None]:
    global _hook
    prev = _hook
    _hook = hook
    try:
        yield
    finally:
        _hook = prev


class Pauser:
    """Parks one thread at a named checkpoint until released.

    Typical use::

        p = Pauser("scan.between_collects", thread_name="worker")
        with interleaving(p):
            worker.start()
            p.wait_parked()
            ...  # mutate while the worker is parked
            p.release()
    """

    def __init__(self, name: str, thread_name: Optional[str] = None, hits: int = 1) -> None:
        self.name = name
        self.thread_name = thread_name
        self.remaining = hits
        self._parked = threading.Event()
        self._go = threading.Event()
        self._lock = threading.Lock()

    def __call__(self, name: str) -> None:
        if name != self.name:
            return
        if self.thread_name is not None and threading.current_thread().name != self.thread_name:
            return
        with self._lock:
            if self.remaining <= 0:
                return
            self.remaining -= 1
        self._parked.set()
        self._go.wait()

    def wait_parked(self, timeout: float = 10.0) -> bool:
        return self._parked.wait(timeout)

    def release(self) -> None:
        self._go.set()
