import json
import shutil
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpart.cli import main
from qpart.graph import Partition, complement, cut_size, imbalance_percent, write_chaco
from qpart.harness import (
    BenchConfig,
    RunReport,
    diversity_by_cut,
    emit_report,
    format_diversity,
    run_benchmark,
)

from conftest import DATA, path_graph, random_connected_graph

FAST = BenchConfig(restarts=4)


@pytest.fixture(scope="module")
def p4_qubo_report():
    return run_benchmark(str(DATA / "p4.graph"), "bespoke-qubo", runs=5, config=FAST)


def test_p4_bespoke(p4_qubo_report):
    r = p4_qubo_report
    assert r.best_cut == 1
    assert r.diversity == {1: 1}
    assert len(r.runs) == 5
    assert r.graph == "p4"
    assert all(x.imbalance == 0 for x in r.runs)


def test_p4_constrained():
    r = run_benchmark(path_graph(4), "constrained", runs=5, config=FAST)
    assert r.best_cut == 1 and r.feasible
    assert all(x.cut == 1 and x.imbalance == 0 for x in r.runs)
    assert all(x.alpha_trace for x in r.runs)
    assert not r.repaired


def test_best_cut_matches_stored_partition(p4_qubo_report):
    r = p4_qubo_report
    g = path_graph(4)
    p = Partition(tuple(r.best_partition))
    assert cut_size(g, p) == r.best_cut
    assert imbalance_percent(g, p) == 0
    assert r.best_cut == min(x.cut for x in r.runs)


def test_grid_fixture_reaches_known_bisection():
    for method in ("qubo", "constrained"):
        r = run_benchmark(str(DATA / "grid_8x8.graph"), method, runs=2, config=FAST)
        assert r.best_cut == 8, method


def test_odd_order_graph_balanced():
    g = random_connected_graph(np.random.default_rng(1), 11, 0.3)
    for method in ("qubo", "constrained"):
        r = run_benchmark(g, method, runs=2, config=FAST)
        p = Partition(tuple(r.best_partition))
        assert imbalance_percent(g, p) == 0


def test_unknown_method_and_bad_runs():
    with pytest.raises(ValueError, match="unknown method"):
        run_benchmark(path_graph(4), "annealing")
    with pytest.raises(ValueError):
        run_benchmark(path_graph(4), "qubo", runs=0)
    with pytest.raises(FileNotFoundError):
        run_benchmark("/nonexistent/graph.graph", "qubo")


def test_diversity_examples():
    g = path_graph(4)
    p = Partition((0, 0, 1, 1))
    assert diversity_by_cut(g, [p, complement(p)]) == {1: 1}
    ring = type(g).from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert diversity_by_cut(ring, [Partition((0, 0, 1, 1)), Partition((0, 1, 1, 0))]) == {2: 2}


def test_diversity_rendering():
    assert format_diversity({596: 51, 595: 3}) == "595 x3\n596 x51"
    assert format_diversity({90: 77}) == "90 x77"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.booleans(), min_size=1, max_size=12))
def test_diversity_invariant_under_complements(seed, flips):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, 8, 0.3)
    parts = [Partition.from_bits(rng.integers(0, 2, 8)) for _ in flips]
    flipped = [complement(p) if f else p for p, f in zip(parts, flips)]
    assert diversity_by_cut(g, parts) == diversity_by_cut(g, flipped)
    assert sum(diversity_by_cut(g, parts).values()) <= len(parts)


def test_diversity_window():
    g = random_connected_graph(np.random.default_rng(3), 14, 0.25)
    tight = run_benchmark(g, "qubo", runs=3, config=FAST)
    wide = run_benchmark(g, "qubo", runs=3, config=BenchConfig(restarts=4, diversity_window=3))
    assert set(tight.diversity) == {tight.best_cut}
    assert max(wide.diversity) <= wide.best_cut + 3
    assert wide.diversity[wide.best_cut] == tight.diversity[tight.best_cut]


def test_json_round_trip(p4_qubo_report):
    text = emit_report(p4_qubo_report, "json")
    back = RunReport.from_json(text)
    assert back == p4_qubo_report
    doc = json.loads(text)
    for key in ("graph", "method", "config", "runs", "best_cut", "diversity", "repaired"):
        assert key in doc
    for key in ("seed", "cut", "imbalance", "time_s", "energy"):
        assert key in doc["runs"][0]
    assert doc["diversity"] == {"1": 1}


def test_json_round_trip_constrained():
    r = run_benchmark(path_graph(4), "constrained", runs=2, config=FAST)
    back = RunReport.from_json(r.to_json())
    assert back == r
    assert "alpha_trace" in json.loads(r.to_json())["runs"][0]


def test_table_columns(p4_qubo_report):
    table = emit_report(p4_qubo_report, "table")
    header = table.splitlines()[0]
    for col in ("cut", "diversity", "sample time (s)"):
        assert col in header
    assert "1 x1" in table


def test_empty_report_rejected():
    with pytest.raises(ValueError):
        emit_report([], "table")


def test_time_scope():
    r = run_benchmark(path_graph(4), "qubo", runs=1, config=BenchConfig(restarts=2, time_scope="total"))
    rec = r.runs[0]
    assert rec.time_s == rec.total_time_s >= rec.sample_time_s
    with pytest.raises(ValueError):
        BenchConfig(time_scope="wall")


def test_parallel_runs_flag_marks_timing():
    r = run_benchmark(path_graph(4), "qubo", runs=2, config=BenchConfig(restarts=2, parallel_runs=True))
    assert r.config["timing"] == "contended"
    serial = run_benchmark(path_graph(4), "qubo", runs=2, config=BenchConfig(restarts=2))
    assert [x.cut for x in r.runs] == [x.cut for x in serial.runs]


# -- command line ------------------------------------------------------------------


def test_cli_partition_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["partition", "--graph", str(DATA / "p4.graph"), "--method", "qubo",
                 "--runs", "2", "--restarts", "2", "--output", "json", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["best_cut"] == 1


def test_cli_partition_table(capsys):
    code = main(["partition", "--graph", str(DATA / "k4.graph"), "--runs", "1", "--restarts", "2"])
    assert code == 0
    assert "diversity" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["partition", "--graph", "/no/such/file.graph"],
        ["partition", "--graph", str(DATA / "weighted_edges.graph")],
        ["partition", "--graph", str(DATA / "p4.graph"), "--runs", "0"],
        ["bench", "--suite", "/no/such/dir"],
    ],
)
def test_cli_input_errors(argv, capsys):
    assert main(argv) == 1
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["partition", "--graph", str(DATA / "p4.graph"), "--method", "nope"]])
def test_cli_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as err:
        main(argv)
    assert err.value.code == 1


def test_cli_weighted_message(capsys):
    main(["partition", "--graph", str(DATA / "weighted_both.graph")])
    assert "weighted format unsupported" in capsys.readouterr().err


def test_cli_infeasible_exit_code(monkeypatch, capsys):
    import qpart.harness as harness
    from qpart.lagrange import AlphaStep, NoFeasibleSolution

    def never(cp, cfg):
        raise NoFeasibleSolution("none", [AlphaStep(1.0, False, 0.0, "escalate")])

    monkeypatch.setattr(harness, "find_multiplier_and_sample", never)
    code = main(["partition", "--graph", str(DATA / "p4.graph"), "--runs", "2", "--output", "json"])
    assert code == 2
    doc = json.loads(capsys.readouterr().out)
    assert doc["best_cut"] is None and doc["diversity"] == {}
    assert doc["runs"][0]["alpha_trace"][0]["ground_feasible"] is False


def test_cli_bench_suite(tmp_path, capsys):
    for name in ("p4", "k4"):
        shutil.copy(DATA / f"{name}.graph", tmp_path)
    (tmp_path / "c6.graph").write_text(write_chaco(path_graph(6)))
    code = main(["bench", "--suite", str(tmp_path), "--runs", "1", "--restarts", "2"])
    assert code == 0
    out = capsys.readouterr().out
    for name in ("p4", "k4", "c6"):
        assert name in out
    assert "qubo" in out and "constrained" in out


def test_console_script_installed():
    exe = shutil.which("qpart")
    cmd = [exe] if exe else [sys.executable, "-m", "qpart.cli"]
    done = subprocess.run(cmd + ["partition", "--graph", str(DATA / "p4.graph"), "--runs", "1",
                                 "--restarts", "2", "--output", "json"],
                          capture_output=True, text=True, timeout=120)
    assert done.returncode == 0, done.stderr
    assert json.loads(done.stdout)["best_cut"] == 1
