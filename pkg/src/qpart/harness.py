"""Benchmark protocol: repeated seeded runs, best cut, diversity and timing."""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .decompose import DecompConfig, solve_large
from .formulations import (
    build_bipartition_qubo,
    build_constrained_problem,
    decode_onehot_partition,
    decode_partition,
)
from .graph import Graph, Partition, canonical, cut_size, imbalance_percent, is_balanced, read_chaco
from .lagrange import LagrangeConfig, NoFeasibleSolution, find_multiplier_and_sample, repair_balance
from .tabu import TabuConfig, sample_qubo

METHODS = {"qubo": "qubo", "bespoke-qubo": "qubo", "constrained": "constrained"}


@dataclass(frozen=True)
class BenchConfig:
    alpha: float = 1.0
    beta: float = 1.0
    seed: int = 0
    time_limit: float | None = None
    subproblem_size: int | None = None
    restarts: int | None = None
    tenure: int | None = None
    stall_limit: int | None = None
    target_samples: int = 60
    workers: int | None = None
    alpha0: float | None = None
    growth: float = 2.0
    max_iters: int = 20
    bisection_iters: int = 8
    diversity_window: int = 0
    time_scope: str = "sample"
    parallel_runs: bool = False

    def __post_init__(self) -> None:
        if self.time_scope not in ("sample", "total"):
            raise ValueError("time_scope must be 'sample' or 'total'")
        if self.diversity_window < 0:
            raise ValueError("diversity_window must be nonnegative")

    def tabu(self, seed: int) -> TabuConfig:
        return TabuConfig(
            tenure=self.tenure,
            restarts=self.restarts,
            stall_limit=self.stall_limit,
            target_samples=self.target_samples,
            seed=seed,
            time_limit=self.time_limit,
            workers=self.workers,
        )

    def inner(self, seed: int) -> TabuConfig | DecompConfig:
        tabu = self.tabu(seed)
        if self.subproblem_size is None:
            return tabu
        return DecompConfig(
            subproblem_size=self.subproblem_size,
            inner=replace(tabu, time_limit=None),
            seed=seed,
            time_limit=self.time_limit,
            target_samples=self.target_samples,
        )


@dataclass
class RunRecord:
    seed: int
    cut: int | None
    imbalance: float | None
    time_s: float
    sample_time_s: float
    total_time_s: float
    energy: float | None
    repaired: bool = False
    alpha_trace: list[dict] | None = None
    alpha_final: float | None = None
    separated: bool | None = None


@dataclass
class RunReport:
    graph: str
    method: str
    n: int
    m: int
    config: dict
    runs: list[RunRecord]
    best_cut: int | None
    best_partition: list[int] | None
    diversity: dict[int, int]
    repaired: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["diversity"] = {str(k): v for k, v in sorted(self.diversity.items())}
        for r in d["runs"]:
            if r["alpha_trace"] is None:
                del r["alpha_trace"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        d = dict(d)
        d["runs"] = [RunRecord(**{"alpha_trace": None, **r}) for r in d["runs"]]
        d["diversity"] = {int(k): int(v) for k, v in d["diversity"].items()}
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))

    @property
    def feasible(self) -> bool:
        return self.best_cut is not None


def diversity_by_cut(g: Graph, partitions: Iterable[Partition]) -> dict[int, int]:
    """Count distinct partitions per cut value, a partition and its complement counting once."""
    seen: dict[int, set[tuple[int, ...]]] = {}
    for p in partitions:
        seen.setdefault(cut_size(g, p), set()).add(canonical(p).assignment)
    return {c: len(s) for c, s in sorted(seen.items())}


def format_diversity(diversity: dict[int, int]) -> str:
    """One ``"<cut> x<count>"`` line per cut value, best cut first."""
    return "\n".join(f"{c} x{k}" for c, k in sorted(diversity.items()))


def _run_once(g: Graph, method: str, cfg: BenchConfig, seed: int) -> tuple[RunRecord, list[Partition]]:
    t0 = time.perf_counter()
    trace = alpha_final = separated = None
    repaired = False
    if method == "qubo":
        q = build_bipartition_qubo(g, cfg.alpha, cfg.beta)
        inner = cfg.inner(seed)
        ts = time.perf_counter()
        samples = solve_large(q, inner) if isinstance(inner, DecompConfig) else sample_qubo(q, inner)
        sample_time = time.perf_counter() - ts
        scored = []
        for s in samples:
            p = decode_partition(g, s)
            if not is_balanced(g, p):
                p = repair_balance(g, p)
                repaired = True
            scored.append((p, s.energy))
    else:
        cp = build_constrained_problem(g)
        lcfg = LagrangeConfig(
            alpha0=cfg.alpha0,
            growth=cfg.growth,
            max_iters=cfg.max_iters,
            bisection_iters=cfg.bisection_iters,
            inner=cfg.inner(seed),
            seed=seed,
        )
        ts = time.perf_counter()
        try:
            res = find_multiplier_and_sample(cp, lcfg)
        except NoFeasibleSolution as exc:
            sample_time = time.perf_counter() - ts
            total = time.perf_counter() - t0
            rec = RunRecord(
                seed=seed, cut=None, imbalance=None,
                time_s=sample_time if cfg.time_scope == "sample" else total,
                sample_time_s=sample_time, total_time_s=total, energy=None,
                alpha_trace=[asdict(a) for a in exc.alpha_trace],
            )
            return rec, []
        sample_time = time.perf_counter() - ts
        trace = [asdict(a) for a in res.alpha_trace]
        alpha_final, separated = res.alpha_final, res.separated
        scored = []
        for s in res.feasible_samples:
            p = decode_onehot_partition(g, s)
            if not is_balanced(g, p):
                p = repair_balance(g, p)
                repaired = True
            scored.append((p, s.energy))
    total = time.perf_counter() - t0

    cuts = [cut_size(g, p) for p, _ in scored]
    k = int(np.argmin(cuts))
    best_p, best_e = scored[k]
    rec = RunRecord(
        seed=seed,
        cut=cuts[k],
        imbalance=imbalance_percent(g, best_p),
        time_s=sample_time if cfg.time_scope == "sample" else total,
        sample_time_s=sample_time,
        total_time_s=total,
        energy=best_e,
        repaired=repaired,
        alpha_trace=trace,
        alpha_final=alpha_final,
        separated=separated,
    )
    return rec, [p for p, _ in scored]


def run_seed(base: int, index: int) -> int:
    return int(np.random.SeedSequence([base & 0xFFFFFFFFFFFFFFFF, index]).generate_state(1, np.uint64)[0])


def run_benchmark(
    graph: Graph | str, method: str, runs: int = 5, config: BenchConfig = BenchConfig()
) -> RunReport:
    """Run ``runs`` independently seeded pipelines and summarise them.

    Sample time is wall-clock around the sampling call only; ``total`` scope
    also counts model construction and decoding. Parsing is never timed.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(METHODS)}")
    method = METHODS[method]
    if runs < 1:
        raise ValueError("runs must be >= 1")
    g = read_chaco(graph) if isinstance(graph, str) else graph
    seeds = [run_seed(config.seed, i) for i in range(runs)]
    if config.parallel_runs and runs > 1:
        with ThreadPoolExecutor(max_workers=runs) as pool:
            outcomes = list(pool.map(lambda s: _run_once(g, method, config, s), seeds))
    else:
        outcomes = [_run_once(g, method, config, s) for s in seeds]

    records = [rec for rec, _ in outcomes]
    partitions = [p for _, ps in outcomes for p in ps]
    best_cut = best_partition = None
    diversity: dict[int, int] = {}
    if partitions:
        cuts = [cut_size(g, p) for p in partitions]
        k = int(np.argmin(cuts))
        best_cut, best_partition = cuts[k], list(partitions[k].assignment)
        near = [p for p, c in zip(partitions, cuts) if c <= best_cut + config.diversity_window]
        diversity = diversity_by_cut(g, near)
    cfg = asdict(config)
    cfg["runs"] = runs
    if config.parallel_runs and runs > 1:
        cfg["timing"] = "contended"
    return RunReport(
        graph=g.name or "graph",
        method=method,
        n=g.n,
        m=g.m,
        config=cfg,
        runs=records,
        best_cut=best_cut,
        best_partition=best_partition,
        diversity=diversity,
        repaired=any(r.repaired for r in records),
    )


def _fmt_time(t: float) -> str:
    return f"{t:.0f}" if t >= 10 else f"{t:.2f}"


def emit_report(reports: RunReport | Sequence[RunReport], fmt: str = "json") -> str:
    """Render as JSON or as an aligned text table (cut / diversity / sample time)."""
    many = not isinstance(reports, RunReport)
    items = list(reports) if many else [reports]
    if not items:
        raise ValueError("nothing to report")
    if fmt == "json":
        if many:
            return json.dumps([r.to_dict() for r in items], indent=2)
        return items[0].to_json()
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")
    header = ["graph", "method", "|V|", "|E|", "cut", "diversity", "sample time (s)"]
    rows = []
    for r in items:
        feasible = [x for x in r.runs if x.cut is not None]
        if feasible:
            best = min(feasible, key=lambda x: (x.cut, x.time_s))
            t = _fmt_time(best.time_s)
        else:
            t = _fmt_time(min(x.time_s for x in r.runs))
        div = format_diversity(r.diversity).split("\n") if r.diversity else ["--"]
        cut = "--" if r.best_cut is None else str(r.best_cut)
        rows.append([r.graph, r.method, str(r.n), str(r.m), cut, div[0], t])
        rows.extend([""] * 5 + [d, ""] for d in div[1:])
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
    right = {2, 3, 4, 5, 6}

    def line(cells: list[str]) -> str:
        return "  ".join(c.rjust(w) if i in right else c.ljust(w) for i, (c, w) in enumerate(zip(cells, widths))).rstrip()

    out = [line(header), line(["-" * w for w in widths])]
    out.extend(line(row) for row in rows)
    return "\n".join(out) + "\n"
