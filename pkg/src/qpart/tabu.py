"""Multi-start single-flip tabu search over a QUBO."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .qubo import Qubo
from .samples import Sample, SampleSet


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class TabuConfig:
    """Tabu search parameters.

    ``None`` for ``tenure``, ``stall_limit`` or ``restarts`` selects a
    size-dependent default: ``max(10, n/20)`` (capped below n), ``50 * n``
    flips, and one restart per available worker.
    """

    tenure: int | None = None
    restarts: int | None = None
    stall_limit: int | None = None
    target_samples: int = 60
    seed: int = 0
    time_limit: float | None = None
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.restarts is not None and self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.target_samples < 1:
            raise ValueError("target_samples must be >= 1")
        if self.tenure is not None and self.tenure < 0:
            raise ValueError("tenure must be nonnegative")
        if self.stall_limit is not None and self.stall_limit < 1:
            raise ValueError("stall_limit must be >= 1")

    def resolved(self, n_vars: int) -> "TabuConfig":
        tenure = max(10, n_vars // 20) if self.tenure is None else self.tenure
        return replace(
            self,
            tenure=min(tenure, max(n_vars - 1, 0)),
            restarts=default_workers() if self.restarts is None else self.restarts,
            stall_limit=50 * n_vars if self.stall_limit is None else self.stall_limit,
            workers=default_workers() if self.workers is None else self.workers,
        )


def restart_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Random stream for one restart, fixed by ``(seed, index)`` alone."""
    return np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, index])


def _walk(q: Qubo, cfg: TabuConfig, index: int, deadline: float | None) -> list[Sample]:
    if index > 0 and deadline is not None and time.perf_counter() >= deadline:
        return []
    k = q._kernel
    n = q.n_vars
    rng = np.random.default_rng(restart_seed(cfg.seed, index))
    x = rng.integers(0, 2, n, dtype=np.uint8)
    h = q.local_fields(x)
    s = q.term_sums(x) if q.squared_terms else np.zeros(0)
    e0 = q.energy(x)
    fstate = np.array([e0, e0])
    istate = np.zeros(3, dtype=np.int64)
    tabu_until = np.zeros(n, dtype=np.int64)
    snaps = np.zeros((cfg.target_samples, n), dtype=np.uint8)
    snap_e = np.zeros(cfg.target_samples)
    snaps[0] = x
    snap_e[0] = e0
    istate[2] = 1
    work_per_step = n + k.v_term.size + 1
    chunk = max(16, 4_000_000 // work_per_step)
    while True:
        done = _kernels.tabu_chunk(
            k.indptr, k.indices, k.data, k.t_w, k.t_rhs, k.v_ptr, k.v_term, k.v_coef,
            x, h, s, tabu_until, fstate, istate, snaps, snap_e,
            cfg.tenure, cfg.stall_limit, chunk,
        )
        if done or (deadline is not None and time.perf_counter() >= deadline):
            break
    taken = min(int(istate[2]), cfg.target_samples)
    return [Sample(snaps[i].copy(), snap_e[i]) for i in range(taken)]


def sample_qubo(q: Qubo, cfg: TabuConfig = TabuConfig()) -> SampleSet:
    """Run ``cfg.restarts`` independent tabu walks and merge their samples.

    Each walk starts from random bits drawn from its own ``(seed, restart)``
    stream, repeatedly takes the best non-tabu flip (a tabu flip is allowed
    when it beats the walk's best energy), and stops after ``stall_limit``
    flips without improvement. Every strict improvement is kept. The merged
    set is identical for identical ``(q, cfg)`` whatever the worker count,
    unless ``time_limit`` cuts walks short.
    """
    if q.n_vars < 1:
        raise ValueError("sample_qubo needs at least one variable")
    cfg = cfg.resolved(q.n_vars)
    deadline = None if cfg.time_limit is None else time.perf_counter() + cfg.time_limit
    q._kernel  # build shared arrays once, before fanning out
    walks: list[list[Sample]] = []
    wave = max(1, min(cfg.workers, cfg.restarts))
    pool = ThreadPoolExecutor(max_workers=wave) if wave > 1 else None
    try:
        for lo in range(0, cfg.restarts, wave):
            if lo and deadline is not None and time.perf_counter() >= deadline:
                break
            batch = range(lo, min(lo + wave, cfg.restarts))
            if pool is None:
                walks.extend(_walk(q, cfg, r, deadline) for r in batch)
            else:
                walks.extend(pool.map(lambda r: _walk(q, cfg, r, deadline), batch))
    finally:
        if pool is not None:
            pool.shutdown()
    found = [s for walk in walks for s in walk]
    # kernel energies are accumulated incrementally; store exact values
    exact = q.energies(np.vstack([s.bits for s in found]))
    return SampleSet.from_samples(
        (Sample(s.bits, e) for s, e in zip(found, exact)), cap=cfg.target_samples
    )
