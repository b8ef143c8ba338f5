"""Workload runner: load a graph, run a mixed op stream on T threads, report."""

from __future__ import annotations

import csv
import math
import statistics
import threading
import time
from dataclasses import dataclass, field, fields
from typing import IO, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import queries
from .graph import Graph
from .rmat import read_adjacency
from .snapshot import StarvationError

OP_KINDS = ("put_vertex", "remove_vertex", "put_edge", "remove_edge", "get_vertex", "get_edge", "query")
UPDATE_KINDS = OP_KINDS[:4]
QUERY_FUNCS = {"bfs": queries.bfs, "sssp": queries.sssp, "bc": queries.bc_single_source}


class ConfigError(ValueError):
    pass


class StarvationAbort(RuntimeError):
    def __init__(self, msg: str, report: Optional["RunReport"] = None) -> None:
        super().__init__(msg)
        self.report = report


def parse_dist(text: str) -> Tuple[float, float, float]:
    parts = text.split("/")
    if len(parts) != 3:
        raise ConfigError(f"distribution must look like U/S/Q, got {text!r}")
    try:
        u, s, q = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"distribution must be numeric, got {text!r}") from None
    return u, s, q


@dataclass
class WorkloadSpec:
    update_pct: float = 40.0
    search_pct: float = 10.0
    query_pct: float = 50.0
    query_kind: str = "bfs"
    total_ops: int = 10_000
    warmup_fraction: float = 0.05
    threads: int = 1
    mode: str = "lin"
    iterations: int = 5
    seed: int = 0
    query_timeout: float = 30.0

    @property
    def dist(self) -> str:
        return "/".join(f"{p:g}" for p in (self.update_pct, self.search_pct, self.query_pct))

    def validate(self) -> None:
        pcts = (self.update_pct, self.search_pct, self.query_pct)
        if any(p < 0 for p in pcts) or abs(sum(pcts) - 100.0) > 1e-9:
            raise ConfigError(f"percentages must be non-negative and sum to 100, got {self.dist}")
        if self.query_kind not in QUERY_FUNCS:
            raise ConfigError(f"query kind must be one of {sorted(QUERY_FUNCS)}, got {self.query_kind!r}")
        if self.mode not in ("lin", "icn"):
            raise ConfigError(f"mode must be 'lin' or 'icn', got {self.mode!r}")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.total_ops < 0:
            raise ConfigError("ops must be non-negative")
        if not 0 <= self.warmup_fraction < 1:
            raise ConfigError("warmup fraction must be in [0, 1)")
        if self.iterations < 1:
            raise ConfigError("iterations must be at least 1")
        if not self.query_timeout > 0:
            raise ConfigError("query timeout must be positive")

    def probabilities(self) -> List[float]:
        u, s, q = self.update_pct / 100, self.search_pct / 100, self.query_pct / 100
        return [u / 4] * 4 + [s / 2] * 2 + [q]

    @property
    def warmup_ops(self) -> int:
        return int(round(self.warmup_fraction * self.total_ops))


Op = Tuple[str, tuple]


def op_stream(spec: WorkloadSpec, n_vertices: int) -> Tuple[List[List[Op]], List[List[Op]]]:
    """Per-thread (warmup, timed) op lists, reproducible from ``spec.seed``.

    Update and search keys are drawn from [0, 2N); query sources from the
    initially loaded keys [0, N).
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    total = spec.warmup_ops + spec.total_ops
    kinds = rng.choice(len(OP_KINDS), size=total, p=spec.probabilities()).tolist()
    span = max(1, 2 * n_vertices)
    k1 = rng.integers(0, span, size=total).tolist()
    k2 = rng.integers(0, span, size=total).tolist()
    hi = max(1, int(math.log2(n_vertices))) if n_vertices > 0 else 1
    w = rng.integers(1, hi, size=total, endpoint=True).tolist()
    src = rng.integers(0, max(1, n_vertices), size=total).tolist()
    ops: List[Op] = []
    for i in range(total):
        kind = OP_KINDS[kinds[i]]
        if kind in ("put_vertex", "remove_vertex", "get_vertex"):
            args = (k1[i],)
        elif kind == "put_edge":
            args = (k1[i], k2[i], float(w[i]))
        elif kind in ("remove_edge", "get_edge"):
            args = (k1[i], k2[i])
        else:
            args = (src[i],)
        ops.append((kind, args))
    warm, timed = ops[: spec.warmup_ops], ops[spec.warmup_ops :]
    t = spec.threads
    return [warm[i::t] for i in range(t)], [timed[i::t] for i in range(t)]


@dataclass
class IterationResult:
    wall_s: float
    counts: Dict[str, int]
    latency_us: Dict[str, float]
    collects_mean: float
    interrupts_mean: float
    starved: int
    progress: List[int] = field(default_factory=list)


@dataclass
class RunReport:
    graph: str
    threads: int
    dist: str
    query: str
    mode: str
    ops: int
    iterations: int
    seed: int
    wall_s: float
    throughput_ops_s: float
    n_put_vertex: int
    n_remove_vertex: int
    n_put_edge: int
    n_remove_edge: int
    n_get_vertex: int
    n_get_edge: int
    n_query: int
    lat_put_vertex_us: float
    lat_remove_vertex_us: float
    lat_put_edge_us: float
    lat_remove_edge_us: float
    lat_get_vertex_us: float
    lat_get_edge_us: float
    lat_query_us: float
    collects_per_query: float
    interrupts_per_query: float
    starved: int
    per_iteration: List[IterationResult] = field(default_factory=list, repr=False)
    final_graph: Optional[Graph] = field(default=None, repr=False)


CSV_COLUMNS = [f.name for f in fields(RunReport) if f.name not in ("per_iteration", "final_graph")]


def load_graph(path: str, capacity: int) -> Tuple[Graph, int]:
    with open(path) as f:
        n, edges = read_adjacency(f)
    g = Graph(capacity=capacity)
    g.load_edges(n, ((s, d, 1.0 if w is None else float(w)) for s, d, w in edges))
    return g, n


def _execute(g: Graph, spec: WorkloadSpec, kind: str, args: tuple):
    if kind == "query":
        deadline = time.monotonic() + spec.query_timeout
        return QUERY_FUNCS[spec.query_kind](g, args[0], spec.mode, deadline)
    return getattr(g, kind)(*args)


def run_iteration(
    spec: WorkloadSpec,
    graph_path: str,
    progress_window: Optional[float] = None,
) -> Tuple[IterationResult, Graph]:
    g, n = load_graph(graph_path, capacity=spec.threads + 2)
    warm, timed = op_stream(spec, n)
    t = spec.threads
    barrier = threading.Barrier(t + 1)
    abort = threading.Event()
    starved = [0] * t
    lat = [{k: 0 for k in OP_KINDS} for _ in range(t)]
    cnt = [{k: 0 for k in OP_KINDS} for _ in range(t)]
    coll = [[0, 0, 0] for _ in range(t)]  # scanned queries, collects, interrupts
    updates_done = [0] * t
    errors: List[BaseException] = []

    def worker(i: int) -> None:
        try:
            g.register_thread()
            for kind, args in warm[i]:
                _execute(g, spec, kind, args)
        except StarvationError:
            starved[i] += 1
            abort.set()
        except BaseException as e:  # surfaced after join
            errors.append(e)
            abort.set()
        try:
            barrier.wait()
        except threading.BrokenBarrierError:
            return
        try:
            for kind, args in timed[i]:
                if abort.is_set():
                    break
                t0 = time.perf_counter_ns()
                try:
                    r = _execute(g, spec, kind, args)
                except StarvationError:
                    starved[i] += 1
                    abort.set()
                    break
                lat[i][kind] += time.perf_counter_ns() - t0
                cnt[i][kind] += 1
                if kind == "query":
                    if r is not None:
                        coll[i][0] += 1
                        coll[i][1] += r.stats.collects
                        coll[i][2] += r.stats.interrupts
                elif kind in UPDATE_KINDS:
                    updates_done[i] += 1
        except BaseException as e:
            errors.append(e)
            abort.set()
        finally:
            g.release_thread()

    threads = [threading.Thread(target=worker, args=(i,), name=f"bench-{i}") for i in range(t)]
    for th in threads:
        th.start()
    barrier.wait()
    t0 = time.monotonic()
    progress: List[int] = []
    if progress_window:
        while any(th.is_alive() for th in threads):
            time.sleep(progress_window)
            progress.append(sum(updates_done))
    for th in threads:
        th.join()
    wall = time.monotonic() - t0
    if progress_window:
        progress.append(sum(updates_done))
    if errors:
        raise errors[0]

    counts = {k: sum(c[k] for c in cnt) for k in OP_KINDS}
    latency = {k: (sum(l[k] for l in lat) / counts[k] / 1000.0 if counts[k] else 0.0) for k in OP_KINDS}
    scanned = sum(c[0] for c in coll)
    res = IterationResult(
        wall_s=wall,
        counts=counts,
        latency_us=latency,
        collects_mean=sum(c[1] for c in coll) / scanned if scanned else 0.0,
        interrupts_mean=sum(c[2] for c in coll) / scanned if scanned else 0.0,
        starved=sum(starved),
        progress=progress,
    )
    return res, g


def _summarise(spec: WorkloadSpec, graph_path: str, its: List[IterationResult], g: Optional[Graph]) -> RunReport:
    med = statistics.median
    wall = med([r.wall_s for r in its])
    done = med([sum(r.counts.values()) for r in its])
    row = dict(
        graph=graph_path,
        threads=spec.threads,
        dist=spec.dist,
        query=spec.query_kind,
        mode=spec.mode,
        ops=spec.total_ops,
        iterations=len(its),
        seed=spec.seed,
        wall_s=wall,
        throughput_ops_s=done / wall if wall > 0 else 0.0,
        collects_per_query=med([r.collects_mean for r in its]),
        interrupts_per_query=med([r.interrupts_mean for r in its]),
        starved=sum(r.starved for r in its),
    )
    for k in OP_KINDS:
        row[f"n_{k}"] = int(med([r.counts[k] for r in its]))
        row[f"lat_{k}_us"] = med([r.latency_us[k] for r in its])
    return RunReport(**row, per_iteration=its, final_graph=g)


def run(spec: WorkloadSpec, graph_path: str, progress_window: Optional[float] = None) -> RunReport:
    """Run ``spec.iterations`` fresh iterations and report per-scalar medians.

    Every iteration reloads the graph and replays the same op stream. Raises
    ``StarvationAbort`` if any query outlives its timeout.
    """
    spec.validate()
    its: List[IterationResult] = []
    g = None
    for _ in range(spec.iterations):
        res, g = run_iteration(spec, graph_path, progress_window)
        its.append(res)
        if res.starved:
            report = _summarise(spec, graph_path, its, g)
            raise StarvationAbort(f"{res.starved} queries exceeded the {spec.query_timeout:g}s timeout", report)
    return _summarise(spec, graph_path, its, g)


def emit_csv(reports: Sequence[RunReport], sink: IO[str]) -> None:
    w = csv.DictWriter(sink, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow({c: getattr(r, c) for c in CSV_COLUMNS})


def read_csv(source: IO[str]) -> List[dict]:
    return list(csv.DictReader(source))


def verify_quiescent(g: Graph, sources: Optional[Sequence[int]] = None) -> None:
    """Structural invariants plus query-vs-oracle checks on a quiet graph.

    Raises AssertionError on the first mismatch.
    """
    from . import oracle

    g.check_invariants()
    verts = g.vertices()
    sg = oracle.seq_graph(verts, g.edges())
    for s in verts if sources is None else sources:
        assert oracle.canonical("bfs", queries.bfs(g, s)) == oracle.seq_apply(sg, "bfs", (s,)), f"bfs({s})"
        assert oracle.canonical("sssp", queries.sssp(g, s)) == oracle.seq_apply(sg, "sssp", (s,)), f"sssp({s})"
