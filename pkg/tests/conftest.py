from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np
import pytest

from qpart.graph import Graph, Partition, cut_size

DATA = Path(__file__).parent / "data"

_acceptance_lines: list[str] = []


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, k) for k in range(1, leaves + 1)])


def random_connected_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    """Random spanning tree plus independent extra edges with probability p."""
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        u, v = int(order[k]), int(order[rng.integers(0, k)])
        edges.add((min(u, v), max(u, v)))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.add((u, v))
    return Graph.from_edges(n, sorted(edges))


def min_balanced_cut(g: Graph) -> int:
    """Exhaustive minimum cut over partitions with part sizes ceil(n/2), floor(n/2)."""
    n = g.n
    best = None
    # pin vertex 0 to part 1 to skip complements
    for rest in itertools.combinations(range(1, n), n // 2 - 1 if n % 2 == 0 else n // 2):
        a = [0] * n
        for v in (0, *rest):
            a[v] = 1
        c = cut_size(g, Partition(tuple(a)))
        best = c if best is None or c < best else best
    return best


def oracle_corpus(seed: int = 20240601, count: int = 50) -> list[Graph]:
    rng = np.random.default_rng(seed)
    return [
        random_connected_graph(rng, int(rng.choice([6, 8, 10, 12])), float(rng.uniform(0.15, 0.6)))
        for _ in range(count)
    ]


def medium_corpus(seed: int = 7, count: int = 20) -> list[Graph]:
    rng = np.random.default_rng(seed)
    graphs = []
    for _ in range(count):
        n = int(rng.integers(20, 201))
        graphs.append(random_connected_graph(rng, n, 2.0 / n))
    return graphs


@pytest.fixture
def p4() -> Graph:
    return path_graph(4)


@pytest.fixture
def k4() -> Graph:
    return complete_graph(4)


@pytest.fixture
def k2() -> Graph:
    return complete_graph(2)


@pytest.fixture
def acceptance_log():
    def record(criterion: int, ok: bool, detail: str) -> None:
        _acceptance_lines.append(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
