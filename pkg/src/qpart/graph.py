"""Undirected graphs, Chaco/Walshaw file I/O and bipartition metrics.

Vertices are 0-based everywhere inside the package. Chaco files are 1-based;
the conversion happens only in :func:`parse_chaco` and :func:`write_chaco`.
"""
from __future__ import annotations

import io
import os
from bisect import bisect_left
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np


class ChacoFormatError(ValueError):
    """Malformed Chaco/METIS graph text."""


class WeightedFormatError(ChacoFormatError):
    """The header declares vertex or edge weights."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph stored as sorted adjacency tuples."""

    adjacency: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        n = len(self.adjacency)
        for v, nbrs in enumerate(self.adjacency):
            prev = -1
            for u in nbrs:
                if not 0 <= u < n:
                    raise ValueError(f"vertex {v}: neighbor {u} out of range")
                if u == v:
                    raise ValueError(f"vertex {v}: self-loop")
                if u <= prev:
                    raise ValueError(f"vertex {v}: neighbors must be sorted and unique")
                prev = u
        for v, nbrs in enumerate(self.adjacency):
            for u in nbrs:
                if not _contains(self.adjacency[u], v):
                    raise ValueError(f"asymmetric adjacency: {v}->{u} without {u}->{v}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], name: str = "") -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(tuple(tuple(sorted(s)) for s in nbrs), name=name)

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @cached_property
    def m(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def degree(self, v: int) -> int:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range for n={self.n}")
        return len(self.adjacency[v])

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.n)
        d.flags.writeable = False
        return d

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each edge once as ``(u, v)`` with ``u < v``."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if v > u:
                    yield u, v

    @cached_property
    def edge_array(self) -> np.ndarray:
        arr = np.array(list(self.edges()), dtype=np.int64).reshape(-1, 2)
        arr.flags.writeable = False
        return arr


def _contains(sorted_nbrs: tuple[int, ...], v: int) -> bool:
    i = bisect_left(sorted_nbrs, v)
    return i < len(sorted_nbrs) and sorted_nbrs[i] == v


@dataclass(frozen=True)
class Partition:
    """Assignment of every vertex to part 0 or part 1."""

    assignment: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(a not in (0, 1) for a in self.assignment):
            raise ValueError("partition labels must be 0 or 1")

    @classmethod
    def from_bits(cls, bits: Sequence[int] | np.ndarray) -> "Partition":
        return cls(tuple(int(b) for b in bits))

    def __len__(self) -> int:
        return len(self.assignment)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.assignment, dtype=np.int8)

    def part_sizes(self) -> tuple[int, int]:
        ones = sum(self.assignment)
        return len(self.assignment) - ones, ones


def _check_length(g: Graph, p: Partition) -> None:
    if len(p) != g.n:
        raise ValueError(f"partition has length {len(p)}, graph has {g.n} vertices")


def cut_size(g: Graph, p: Partition) -> int:
    """Number of edges whose endpoints carry different labels."""
    _check_length(g, p)
    if g.m == 0:
        return 0
    a = p.as_array()
    e = g.edge_array
    return int(np.count_nonzero(a[e[:, 0]] != a[e[:, 1]]))


def imbalance_percent(g: Graph, p: Partition) -> float:
    """How far the larger part exceeds the ideal size ``ceil(n/2)``, in percent.

    For even n this is ``100 * (2 * max_part / n - 1)``; odd n counts a
    ``ceil(n/2)`` / ``floor(n/2)`` split as perfectly balanced.
    """
    _check_length(g, p)
    ideal = (g.n + 1) // 2
    return 100.0 * (max(p.part_sizes()) / ideal - 1.0)


def is_balanced(g: Graph, p: Partition) -> bool:
    _check_length(g, p)
    return max(p.part_sizes()) <= (g.n + 1) // 2


def complement(p: Partition) -> Partition:
    return Partition(tuple(1 - a for a in p.assignment))


def canonical(p: Partition) -> Partition:
    """The lexicographically smaller of ``p`` and its complement."""
    c = complement(p)
    return min(p, c, key=lambda q: q.assignment)


def parse_chaco(source: str | TextIO, name: str = "") -> Graph:
    """Parse an unweighted Chaco/METIS graph.

    ``source`` is either the file text or an open text stream. Lines starting
    with ``%`` are comments anywhere in the file. An empty adjacency line is
    an isolated vertex, so blank lines are significant after the header.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    lines = (ln.rstrip("\r\n") for ln in stream)
    header = None
    lineno = 0
    for raw in lines:
        lineno += 1
        s = raw.strip()
        if s.startswith("%") or not s:
            continue
        header = s.split()
        break
    if header is None:
        raise ChacoFormatError("missing header line")
    if len(header) < 2:
        raise ChacoFormatError(f"line {lineno}: header needs 'n m [fmt]'")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ChacoFormatError(f"line {lineno}: non-integer header") from exc
    if n < 0 or m < 0:
        raise ChacoFormatError(f"line {lineno}: negative header values")
    if len(header) >= 3:
        fmt = header[2]
        if not fmt.isdigit():
            raise ChacoFormatError(f"line {lineno}: bad fmt code {fmt!r}")
        if any(ch != "0" for ch in fmt):
            raise WeightedFormatError(
                f"weighted format unsupported (fmt={fmt}); only unweighted graphs are accepted"
            )

    adjacency: list[tuple[int, ...]] = []
    for raw in lines:
        lineno += 1
        s = raw.strip()
        if s.startswith("%"):
            continue
        if len(adjacency) == n:
            if s:
                raise ChacoFormatError(f"line {lineno}: more than n={n} adjacency lines")
            continue
        v = len(adjacency)
        try:
            nbrs = [int(tok) - 1 for tok in s.split()]
        except ValueError as exc:
            raise ChacoFormatError(f"line {lineno}: non-integer neighbor") from exc
        for u in nbrs:
            if not 0 <= u < n:
                raise ChacoFormatError(f"line {lineno}: neighbor {u + 1} out of range 1..{n}")
            if u == v:
                raise ChacoFormatError(f"line {lineno}: self-loop on vertex {v + 1}")
        ordered = tuple(sorted(nbrs))
        if len(set(ordered)) != len(ordered):
            raise ChacoFormatError(f"line {lineno}: duplicate neighbor for vertex {v + 1}")
        adjacency.append(ordered)
    if len(adjacency) != n:
        raise ChacoFormatError(f"expected {n} adjacency lines, found {len(adjacency)}")

    total = sum(len(a) for a in adjacency)
    for v, nbrs in enumerate(adjacency):
        for u in nbrs:
            if not _contains(adjacency[u], v):
                raise ChacoFormatError(
                    f"asymmetric adjacency: {v + 1} lists {u + 1} but not vice versa"
                )
    if total != 2 * m:
        raise ChacoFormatError(f"header declares m={m} edges, adjacency has {total / 2:g}")
    return Graph(tuple(adjacency), name=name)


def read_chaco(path: str) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_chaco(fh, name=os.path.splitext(os.path.basename(path))[0])


def write_chaco(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(" ".join(str(u + 1) for u in nbrs) for nbrs in g.adjacency)
    return "\n".join(out) + "\n"
