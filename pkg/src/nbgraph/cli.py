"""Command line entry point: gen, bench, bc-full and report."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from typing import List, Optional

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STARVED = 3


def _int_list(text: str) -> List[int]:
    try:
        vals = [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("expected at least one value")
    return vals


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nbgraph", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an R-MAT graph in adjacency format")
    g.add_argument("--vertices", type=int, required=True)
    g.add_argument("--edges", type=int, default=None, help="default: 10 x vertices")
    for name in "abcd":
        g.add_argument(f"--{name}", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--weighted", action="store_true")
    g.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="run a mixed workload and write CSV")
    b.add_argument("--graph", required=True)
    b.add_argument("--threads", type=_int_list, default=[1], help="one or more, comma separated")
    b.add_argument("--dist", default="40/10/50", help="update/search/query percentages")
    b.add_argument("--query", choices=["bfs", "sssp", "bc"], default="bfs")
    b.add_argument("--ops", type=int, default=10_000)
    b.add_argument("--warmup", type=float, default=0.05)
    b.add_argument("--mode", choices=["lin", "icn"], default="lin")
    b.add_argument("--iters", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--timeout", type=float, default=30.0, help="per-query timeout in seconds")
    b.add_argument("--csv", default="-", help="output path, '-' for stdout")
    b.add_argument("--plot-dir", default=None, help="also render figures into this directory")

    c = sub.add_parser("bc-full", help="betweenness centrality of every vertex")
    c.add_argument("--graph", required=True)
    c.add_argument("--mode", choices=["lin", "icn"], default="lin")
    c.add_argument("--csv", default="-")

    r = sub.add_parser("report", help="render figures from bench CSV files")
    r.add_argument("csv", nargs="+")
    r.add_argument("--out-dir", required=True)
    r.add_argument("--format", default="png", choices=["png", "pdf", "svg"])
    return p


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def cmd_gen(args) -> int:
    from .rmat import RmatParams, write_graph

    kw = {k: getattr(args, k) for k in "abcd" if getattr(args, k) is not None}
    try:
        params = RmatParams.with_defaults(args.vertices, args.edges, seed=args.seed, weighted=args.weighted, **kw)
        write_graph(params, args.out)
    except ValueError as e:
        print(f"gen: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cmd_bench(args) -> int:
    from . import bench
    from .rmat import AdjacencyFormatError

    try:
        u, s, q = bench.parse_dist(args.dist)
        specs = [
            bench.WorkloadSpec(u, s, q, args.query, args.ops, args.warmup, t, args.mode, args.iters, args.seed, args.timeout)
            for t in args.threads
        ]
        for sp in specs:
            sp.validate()
        if not os.path.isfile(args.graph):
            raise bench.ConfigError(f"graph file not found: {args.graph}")
    except bench.ConfigError as e:
        print(f"bench: {e}", file=sys.stderr)
        return EXIT_CONFIG

    reports = []
    code = EXIT_OK
    for sp in specs:
        try:
            reports.append(bench.run(sp, args.graph))
        except AdjacencyFormatError as e:
            print(f"bench: {args.graph}: {e}", file=sys.stderr)
            return EXIT_CONFIG
        except bench.StarvationAbort as e:
            print(f"bench: starvation at {sp.threads} threads: {e}", file=sys.stderr)
            if e.report is not None:
                reports.append(e.report)
            code = EXIT_STARVED
            break
    out = _open_out(args.csv)
    try:
        bench.emit_csv(reports, out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.plot_dir:
        from .plotting import render

        render(bench.read_csv(_rows_io(reports)), args.plot_dir)
    return code


def _rows_io(reports):
    import io

    from . import bench

    buf = io.StringIO()
    bench.emit_csv(reports, buf)
    buf.seek(0)
    return buf


def cmd_bc_full(args) -> int:
    from .bench import load_graph
    from .queries import bc_all
    from .rmat import AdjacencyFormatError

    try:
        g, _ = load_graph(args.graph, capacity=4)
    except (OSError, AdjacencyFormatError) as e:
        print(f"bc-full: {e}", file=sys.stderr)
        return EXIT_CONFIG
    scores = bc_all(g, args.mode)
    out = _open_out(args.csv)
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["vertex", "bc"])
        for v in sorted(scores):
            w.writerow([v, repr(scores[v])])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_report(args) -> int:
    from .bench import read_csv
    from .plotting import render

    rows = []
    try:
        for path in args.csv:
            with open(path) as f:
                rows.extend(read_csv(f))
    except OSError as e:
        print(f"report: {e}", file=sys.stderr)
        return EXIT_CONFIG
    for path in render(rows, args.out_dir, args.format):
        print(path)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "bench": cmd_bench, "bc-full": cmd_bc_full, "report": cmd_report}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.cmd](args)


if __name__ == "__main__":
    sys.exit(main())
