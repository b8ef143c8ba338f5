import csv
import subprocess
import sys

import pytest

from nbgraph import bench, cli
from nbgraph import oracle as O
from nbgraph import rmat


def nbgraph(*args):
    return subprocess.run([sys.executable, "-m", "nbgraph.cli", *args], capture_output=True, text=True)


def test_gen_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for out in (a, b):
        r = nbgraph("gen", "--vertices", "256", "--edges", "2000", "--seed", "42", "--weighted", "--out", str(out))
        assert r.returncode == 0, r.stderr
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.txt.meta.json").read_bytes() == (tmp_path / "b.txt.meta.json").read_bytes()
    assert a.read_text().splitlines()[0] == "256 2000"


def test_gen_rejects_bad_params(tmp_path):
    out = str(tmp_path / "x.txt")
    assert cli.main(["gen", "--vertices", "100", "--out", out]) == cli.EXIT_CONFIG
    assert cli.main(["gen", "--vertices", "4", "--edges", "13", "--out", out]) == cli.EXIT_CONFIG
    assert cli.main(["gen", "--vertices", "8", "--a", "0.9", "--out", out]) == cli.EXIT_CONFIG


@pytest.fixture(scope="module")
def graph_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "g.txt"
    assert cli.main(["gen", "--vertices", "32", "--edges", "120", "--seed", "5", "--out", str(path)]) == 0
    return path


def test_bench_writes_csv_and_figures(graph_file, tmp_path):
    out = tmp_path / "r.csv"
    plots = tmp_path / "plots"
    code = cli.main(
        ["bench", "--graph", str(graph_file), "--threads", "1,2", "--dist", "25/25/50", "--ops", "100",
         "--iters", "2", "--csv", str(out), "--plot-dir", str(plots)]
    )
    assert code == cli.EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [r["threads"] for r in rows] == ["1", "2"]
    assert {p.name for p in plots.iterdir()} == {"throughput.png", "collects.png", "latency.png"}


@pytest.mark.parametrize(
    "args",
    [
        ["--dist", "50/50/50"],
        ["--dist", "nonsense"],
        ["--mode", "eventual"],
        ["--query", "pagerank"],
        ["--threads", "0"],
        ["--threads", "x"],
        ["--warmup", "1.5"],
    ],
)
def test_bench_config_errors_exit_2(graph_file, args):
    with pytest.raises(SystemExit) as exc:
        code = cli.main(["bench", "--graph", str(graph_file), "--ops", "10", "--iters", "1", *args])
        raise SystemExit(code)
    assert exc.value.code == cli.EXIT_CONFIG


def test_bench_missing_or_malformed_graph_exit_2(tmp_path):
    assert cli.main(["bench", "--graph", str(tmp_path / "none.txt")]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.txt"
    bad.write_text("3 1\n0 9\n")
    assert cli.main(["bench", "--graph", str(bad), "--ops", "10", "--iters", "1", "--csv", str(tmp_path / "o.csv")]) == cli.EXIT_CONFIG


def test_bench_starvation_exit_3(graph_file, tmp_path, monkeypatch):
    def starve(*_a, **_k):
        raise bench.StarvationError("forced")

    monkeypatch.setitem(bench.QUERY_FUNCS, "bfs", starve)
    out = tmp_path / "s.csv"
    code = cli.main(["bench", "--graph", str(graph_file), "--ops", "50", "--iters", "1", "--csv", str(out)])
    assert code == cli.EXIT_STARVED
    rows = list(csv.DictReader(out.open()))
    assert int(rows[0]["starved"]) >= 1


def test_bc_full_matches_brute_force(graph_file, tmp_path):
    out = tmp_path / "bc.csv"
    assert cli.main(["bc-full", "--graph", str(graph_file), "--csv", str(out)]) == 0
    with open(graph_file) as f:
        n, edges = rmat.read_adjacency(f)
    ref = O.seq_graph(range(n), [(s, d, 1.0) for s, d, _ in edges])
    got = {int(r["vertex"]): float(r["bc"]) for r in csv.DictReader(out.open())}
    assert set(got) == set(range(n))
    for v in range(n):
        assert got[v] == pytest.approx(O.brute_bc(ref, v), abs=1e-9)


def test_report_renders_from_csv(graph_file, tmp_path):
    out = tmp_path / "r.csv"
    cli.main(["bench", "--graph", str(graph_file), "--ops", "40", "--iters", "1", "--csv", str(out)])
    code = cli.main(["report", str(out), "--out-dir", str(tmp_path / "figs"), "--format", "svg"])
    assert code == 0
    assert sorted(p.name for p in (tmp_path / "figs").iterdir()) == ["collects.svg", "latency.svg", "throughput.svg"]


def test_report_missing_csv(tmp_path):
    assert cli.main(["report", str(tmp_path / "nope.csv"), "--out-dir", str(tmp_path)]) == cli.EXIT_CONFIG
