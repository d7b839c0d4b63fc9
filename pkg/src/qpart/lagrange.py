"""Penalty-multiplier search for constrained problems, plus balance repair.

:func:`find_multiplier_and_sample` compiles the problem to a QUBO with
penalty weight alpha, samples it, and moves alpha by looking only at the
lowest-energy sample: grow geometrically until that sample is feasible,
then bisect down towards the smallest alpha that still keeps it feasible.
If the samples drawn at that alpha do not separate feasible from infeasible
energies, alpha is raised again until they do.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np

from .decompose import DecompConfig, solve_large
from .formulations import ConstrainedProblem, compile_penalty, is_feasible, objective_value
from .graph import Graph, Partition
from .qubo import Qubo, brute_force
from .samples import Sample, SampleSet
from .tabu import TabuConfig, sample_qubo

Sampler = Callable[[Qubo, int], SampleSet]
InnerConfig = Union[TabuConfig, DecompConfig, Sampler]


class NoFeasibleSolution(RuntimeError):
    def __init__(self, message: str, alpha_trace: list["AlphaStep"]) -> None:
        super().__init__(message)
        self.alpha_trace = alpha_trace


@dataclass(frozen=True)
class AlphaStep:
    alpha: float
    ground_feasible: bool
    ground_energy: float
    phase: str


@dataclass(frozen=True)
class LagrangeConfig:
    """Multiplier search schedule.

    ``alpha0=None`` starts from :func:`default_alpha0`. ``inner`` is a
    :class:`TabuConfig`, a :class:`DecompConfig`, or any callable
    ``(qubo, seed) -> SampleSet``.
    """

    alpha0: float | None = None
    growth: float = 2.0
    max_iters: int = 20
    bisection_iters: int = 8
    inner: InnerConfig = field(default_factory=TabuConfig)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.alpha0 is not None and self.alpha0 <= 0:
            raise ValueError("alpha0 must be positive")
        if self.growth <= 1:
            raise ValueError("growth must exceed 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.bisection_iters < 0:
            raise ValueError("bisection_iters must be nonnegative")


@dataclass(frozen=True)
class LagrangeResult:
    best_feasible: Sample
    best_objective: float
    alpha_final: float
    alpha_trace: list[AlphaStep]
    separated: bool
    final_samples: SampleSet
    feasible_samples: SampleSet


def default_alpha0(cp: ConstrainedProblem) -> float:
    """Largest absolute objective row sum; the maximum vertex degree for graphs."""
    rows = np.zeros(cp.n_vars)
    for (i, j), c in cp.objective.quadratic.items():
        rows[i] += abs(c)
        rows[j] += abs(c)
    for i, c in cp.objective.linear.items():
        rows[i] += abs(c)
    top = float(rows.max()) if rows.size else 0.0
    return top if top > 0 else 1.0


def brute_force_sampler(lowest: int = 64) -> Sampler:
    """Exact inner sampler for small problems: the ``lowest`` best assignments."""

    def run(q: Qubo, seed: int) -> SampleSet:
        return brute_force(q, lowest=min(lowest, 2**q.n_vars))

    return run


def _sampler(inner: InnerConfig) -> Sampler:
    if isinstance(inner, TabuConfig):
        return lambda q, seed: sample_qubo(q, replace(inner, seed=seed))
    if isinstance(inner, DecompConfig):
        return lambda q, seed: solve_large(q, replace(inner, seed=seed))
    return inner


def _step_seed(seed: int, step: int) -> int:
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, step])
    return int(ss.generate_state(1, np.uint64)[0])


def separation_check(cp: ConstrainedProblem, samples: SampleSet) -> bool:
    """True iff every feasible sample has lower energy than every infeasible one."""
    feas = [s.energy for s in samples if is_feasible(cp, s)]
    infeas = [s.energy for s in samples if not is_feasible(cp, s)]
    if not feas or not infeas:
        return True
    return max(feas) < min(infeas)


def find_multiplier_and_sample(
    cp: ConstrainedProblem, cfg: LagrangeConfig = LagrangeConfig()
) -> LagrangeResult:
    sampler = _sampler(cfg.inner)
    trace: list[AlphaStep] = []
    pool: dict[bytes, Sample] = {}
    step = 0

    def run(alpha: float, phase: str) -> tuple[bool, SampleSet]:
        nonlocal step
        samples = sampler(compile_penalty(cp, alpha), _step_seed(cfg.seed, step))
        step += 1
        for s in samples:
            if s.key not in pool and is_feasible(cp, s):
                pool[s.key] = Sample(s.bits, objective_value(cp, s))
        ground = samples.first
        ok = is_feasible(cp, ground)
        trace.append(AlphaStep(alpha, ok, ground.energy, phase))
        return ok, samples

    alpha = cfg.alpha0 if cfg.alpha0 is not None else default_alpha0(cp)
    lo = 0.0
    hi: float | None = None
    final: SampleSet | None = None
    last: SampleSet | None = None
    for _ in range(cfg.max_iters):
        ok, last = run(alpha, "escalate")
        if ok:
            hi, final = alpha, last
            break
        lo = alpha
        alpha *= cfg.growth

    if hi is not None:
        for _ in range(cfg.bisection_iters):
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            ok, samples = run(mid, "bisect")
            if ok:
                hi, final = mid, samples
            else:
                lo = mid
        alpha_final = hi
    else:
        alpha_final = trace[-1].alpha
        final = last

    separated = final is not None and separation_check(cp, final)
    if hi is not None and not separated:
        # the smallest feasible-ground alpha rarely separates the two classes;
        # raise it until the sampled set does
        alpha = alpha_final
        for _ in range(cfg.max_iters):
            alpha *= cfg.growth
            _, samples = run(alpha, "separate")
            if separation_check(cp, samples):
                alpha_final, final, separated = alpha, samples, True
                break

    if not pool:
        raise NoFeasibleSolution(
            f"no feasible sample after {len(trace)} multiplier steps", trace
        )
    feasible = SampleSet(pool.values())
    best = feasible.first
    return LagrangeResult(
        best_feasible=best,
        best_objective=best.energy,
        alpha_final=alpha_final,
        alpha_trace=trace,
        separated=separated,
        final_samples=final,
        feasible_samples=feasible,
    )


def repair_balance(g: Graph, p: Partition) -> Partition:
    """Greedily move vertices out of the larger part until sizes differ by at most one.

    Each move takes the vertex of the larger part whose move raises the cut
    least (ties to the lower index).
    """
    a = p.as_array().astype(np.int64)
    n = g.n
    ideal = math.ceil(n / 2)
    sizes = [int((a == 0).sum()), int((a == 1).sum())]
    while max(sizes) > ideal:
        big = 0 if sizes[0] > sizes[1] else 1
        best_v, best_gain = -1, None
        for v in np.flatnonzero(a == big):
            same = sum(1 for u in g.adjacency[v] if a[u] == big)
            change = same - (len(g.adjacency[v]) - same)
            if best_gain is None or change < best_gain:
                best_v, best_gain = int(v), change
        a[best_v] = 1 - big
        sizes[big] -= 1
        sizes[1 - big] += 1
    return Partition.from_bits(a)
