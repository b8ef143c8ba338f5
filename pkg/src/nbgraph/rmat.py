"""R-MAT graph generation and the plain-text adjacency format.

File layout: a header line ``V E``, then ``E`` lines ``src dst [weight]``,
whitespace separated, vertices numbered from 0. ``gen`` also writes a JSON
sidecar (``<out>.meta.json``) with the parameters and the RNG identifier.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from typing import IO, List, Optional, Tuple

import numpy as np

RNG_ALGORITHM = "numpy.random.PCG64"

Edge = Tuple[int, int, Optional[int]]


class AdjacencyFormatError(ValueError):
    def __init__(self, lineno: int, msg: str) -> None:
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def load_defaults() -> dict:
    text = resources.files("nbgraph").joinpath("data/rmat_defaults.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class RmatParams:
    n_vertices: int
    n_edges: int
    a: float = 0.5
    b: float = 0.1
    c: float = 0.1
    d: float = 0.3
    seed: int = 0
    weighted: bool = False

    @classmethod
    def with_defaults(cls, n_vertices: int, n_edges: Optional[int] = None, **kw) -> "RmatParams":
        dft = load_defaults()
        probs = {k: kw.pop(k, None) for k in "abcd"}
        probs = {k: dft[k] if v is None else v for k, v in probs.items()}
        if n_edges is None:
            n_edges = dft["edges_per_vertex"] * n_vertices
        return cls(n_vertices, n_edges, **probs, **kw)

    @property
    def scale(self) -> int:
        return self.n_vertices.bit_length() - 1

    def validate(self) -> None:
        n = self.n_vertices
        if n < 1 or n & (n - 1):
            raise ValueError(f"n_vertices must be a power of two, got {n}")
        probs = (self.a, self.b, self.c, self.d)
        if any(p < 0 or not math.isfinite(p) for p in probs):
            raise ValueError(f"quadrant probabilities must be non-negative, got {probs}")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError(f"a+b+c+d must equal 1, got {sum(probs)!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.n_edges < 0:
            raise ValueError(f"n_edges must be non-negative, got {self.n_edges}")
        if self.n_edges > n * (n - 1):
            raise ValueError(f"n_edges={self.n_edges} exceeds N(N-1)={n * (n - 1)}")
        reach = self.reachable_edges()
        if self.n_edges > reach:
            raise ValueError(f"n_edges={self.n_edges} exceeds the {reach} non-loop cells reachable with these probabilities")

    def reachable_edges(self) -> int:
        """Off-diagonal matrix cells with non-zero probability."""
        quads = sum(p > 0 for p in (self.a, self.b, self.c, self.d))
        diag = (self.a > 0) + (self.d > 0)
        return quads**self.scale - diag**self.scale


def draw_pairs(params: RmatParams, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` raw (src, dst) draws by recursive quadrant descent.

    Self-loops and duplicates are kept; ``generate`` filters them.
    """
    k = params.scale
    cuts = np.cumsum([params.a, params.b, params.c])
    u = rng.random((count, k))
    q = np.searchsorted(cuts, u, side="right")
    rows = (q >> 1) & 1
    cols = q & 1
    weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
    src = rows @ weights if k else np.zeros(count, dtype=np.int64)
    dst = cols @ weights if k else np.zeros(count, dtype=np.int64)
    return np.stack([src, dst], axis=1)


def generate(params: RmatParams) -> List[Edge]:
    """Distinct non-loop edges sorted by (src, dst); weights when requested."""
    params.validate()
    rng = np.random.Generator(np.random.PCG64(params.seed))
    seen = set()
    need = params.n_edges
    while len(seen) < need:
        batch = max(64, 2 * (need - len(seen)))
        for s, d in draw_pairs(params, batch, rng).tolist():
            if s != d and (s, d) not in seen:
                seen.add((s, d))
                if len(seen) == need:
                    break
    pairs = sorted(seen)
    if not params.weighted:
        return [(s, d, None) for s, d in pairs]
    hi = max(1, params.scale)
    ws = rng.integers(1, hi, size=len(pairs), endpoint=True).tolist()
    return [(s, d, w) for (s, d), w in zip(pairs, ws)]


def _fmt(w) -> str:
    if isinstance(w, float) and w.is_integer():
        return str(int(w))
    return repr(w) if isinstance(w, float) else str(w)


def write_adjacency(n_vertices: int, edges: List[Edge], sink: IO[str]) -> None:
    sink.write(f"{n_vertices} {len(edges)}\n")
    for s, d, w in edges:
        if w is None:
            sink.write(f"{s} {d}\n")
        else:
            sink.write(f"{s} {d} {_fmt(w)}\n")


def _number(tok: str, lineno: int):
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        v = float(tok)
    except ValueError:
        raise AdjacencyFormatError(lineno, f"bad weight {tok!r}") from None
    if not math.isfinite(v):
        raise AdjacencyFormatError(lineno, f"weight must be finite, got {tok!r}")
    return v


def read_adjacency(source: IO[str]) -> Tuple[int, List[Edge]]:
    lines = iter(source)
    header = next(lines, None)
    if header is None or not header.strip():
        raise AdjacencyFormatError(1, "missing 'V E' header")
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise AdjacencyFormatError(1, f"header must be 'V E', got {header.strip()!r}")
    n, e = int(parts[0]), int(parts[1])
    edges: List[Edge] = []
    for lineno, line in enumerate(lines, start=2):
        toks = line.split()
        if not toks:
            continue
        if len(toks) not in (2, 3):
            raise AdjacencyFormatError(lineno, f"expected 'src dst [weight]', got {line.strip()!r}")
        try:
            s, d = int(toks[0]), int(toks[1])
        except ValueError:
            raise AdjacencyFormatError(lineno, f"vertex ids must be integers: {line.strip()!r}") from None
        if not (0 <= s < n and 0 <= d < n):
            raise AdjacencyFormatError(lineno, f"vertex id out of range [0, {n})")
        w = _number(toks[2], lineno) if len(toks) == 3 else None
        edges.append((s, d, w))
    if len(edges) != e:
        raise AdjacencyFormatError(len(edges) + 1, f"header promises {e} edges, found {len(edges)}")
    return n, edges


def metadata(params: RmatParams) -> dict:
    return {"params": asdict(params), "rng": RNG_ALGORITHM, "numpy": np.__version__}


def write_graph(params: RmatParams, path: str) -> List[Edge]:
    """Generate and write ``path`` plus its ``.meta.json`` sidecar."""
    edges = generate(params)
    with open(path, "w", newline="\n") as f:
        write_adjacency(params.n_vertices, edges, f)
    with open(path + ".meta.json", "w", newline="\n") as f:
        json.dump(metadata(params), f, indent=2, sort_keys=True)
        f.write("\n")
    return edges
