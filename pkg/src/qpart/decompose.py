"""Large-QUBO decomposition: clamp most variables, solve the rest, repeat."""
from __future__ import annotations

import hashlib
import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .qubo import Qubo, SquaredTerm, brute_force
from .samples import Sample, SampleSet, dedup_insert
from .tabu import TabuConfig, sample_qubo

log = logging.getLogger(__name__)

EXACT_SUBPROBLEM_LIMIT = 20


@dataclass(frozen=True)
class DecompConfig:
    subproblem_size: int = 50
    outer_stall_limit: int | None = None
    inner: TabuConfig = field(default_factory=TabuConfig)
    seed: int = 0
    time_limit: float | None = None
    subset_memory: int = 16
    target_samples: int = 60

    def __post_init__(self) -> None:
        if self.subproblem_size < 1:
            raise ValueError("subproblem_size must be >= 1")
        if self.outer_stall_limit is not None and self.outer_stall_limit < 1:
            raise ValueError("outer_stall_limit must be >= 1")

    def stall_limit_for(self, n_vars: int) -> int:
        if self.outer_stall_limit is not None:
            return self.outer_stall_limit
        return max(50, 10 * math.ceil(n_vars / self.subproblem_size))


def extract_subqubo(q: Qubo, bits: Sequence[int] | np.ndarray, subset: Sequence[int]) -> Qubo:
    """QUBO over ``subset`` with every other variable clamped to ``bits``.

    Variable k of the result is ``subset[k]``. For every sub-assignment y,
    ``sub.energy(y) == q.energy(bits with subset set to y)``.
    """
    x = np.asarray(bits, dtype=np.float64)
    if x.shape != (q.n_vars,):
        raise ValueError(f"expected {q.n_vars} bits, got shape {x.shape}")
    sub = np.asarray(subset, dtype=np.int64)
    if sub.size and (sub.min() < 0 or sub.max() >= q.n_vars):
        raise IndexError("subset index out of range")
    if np.unique(sub).size != sub.size:
        raise ValueError("subset indices must be distinct")
    pos = np.full(q.n_vars, -1, dtype=np.int64)
    pos[sub] = np.arange(sub.size)
    free = pos >= 0

    diag = q._diag
    offset = q.base_offset + float(diag[~free] @ x[~free])
    lin = diag[sub].copy()

    r, c, v = q._rows, q._cols, q._vals
    fr, fc = free[r], free[c]
    both = fr & fc
    offset += float(v[~fr & ~fc] @ (x[r[~fr & ~fc]] * x[c[~fr & ~fc]]))
    np.add.at(lin, pos[r[fr & ~fc]], v[fr & ~fc] * x[c[fr & ~fc]])
    np.add.at(lin, pos[c[~fr & fc]], v[~fr & fc] * x[r[~fr & fc]])
    a, b = pos[r[both]], pos[c[both]]
    lo, hi = np.minimum(a, b), np.maximum(a, b)

    terms = []
    for t in q.squared_terms:
        tf = free[t.indices]
        rhs = t.rhs - float(t.coefs[~tf] @ x[t.indices[~tf]])
        if tf.any():
            terms.append(SquaredTerm(t.weight, pos[t.indices[tf]], t.coefs[tf], rhs))
        else:
            offset += t.weight * rhs * rhs

    n = sub.size
    rows = np.concatenate([np.arange(n), lo])
    cols = np.concatenate([np.arange(n), hi])
    vals = np.concatenate([lin, v[both]])
    return Qubo.from_arrays(n, rows, cols, vals, offset, terms)


def greedy_start(q: Qubo, rng: np.random.Generator) -> np.ndarray:
    """Visit variables in random order, setting each bit iff that lowers the energy."""
    k = q._kernel
    x = np.zeros(q.n_vars, dtype=np.uint8)
    h = q._diag.astype(np.float64).copy()
    s = np.zeros(len(q.squared_terms))
    for i in rng.permutation(q.n_vars):
        delta = h[i]
        lo, hi = k.v_ptr[i], k.v_ptr[i + 1]
        if hi > lo:
            t, a = k.v_term[lo:hi], k.v_coef[lo:hi]
            delta += float(np.sum(k.t_w[t] * (2.0 * a * (s[t] - k.t_rhs[t]) + a * a)))
        if delta < 0:
            x[i] = 1
            lo, hi = k.indptr[i], k.indptr[i + 1]
            h[k.indices[lo:hi]] += k.data[lo:hi]
            lo, hi = k.v_ptr[i], k.v_ptr[i + 1]
            s[k.v_term[lo:hi]] += k.v_coef[lo:hi]
    return x


def _fingerprint(subset: np.ndarray) -> str:
    return hashlib.blake2b(np.sort(subset).tobytes(), digest_size=8).hexdigest()


def _derived_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, *path]).generate_state(1, np.uint64)[0])


def solve_large(q: Qubo, cfg: DecompConfig = DecompConfig()) -> SampleSet:
    """Improve a greedy assignment by repeatedly re-solving clamped sub-QUBOs.

    Each outer iteration ranks variables by ``|flip delta|`` (largest first,
    ties to the lower index), takes the first block of ``subproblem_size``
    variables in that ranking whose fingerprint is not in the recent-subset
    memory, solves it exactly (up to 20 variables) or by tabu search, and
    adopts the result only if the full energy strictly drops. Stops after
    ``outer_stall_limit`` iterations without improvement or at the time limit.
    """
    n = q.n_vars
    if n < 1:
        raise ValueError("solve_large needs at least one variable")
    start = time.perf_counter()
    deadline = None if cfg.time_limit is None else start + cfg.time_limit
    if cfg.subproblem_size >= n:
        inner = replace(cfg.inner, seed=cfg.seed, time_limit=cfg.time_limit or cfg.inner.time_limit)
        return sample_qubo(q, inner).truncate(cfg.target_samples)

    found: SampleSet | None = None
    stall_limit = cfg.stall_limit_for(n)
    round_no = 0
    it = 0
    while True:
        rng = np.random.default_rng(
            np.random.SeedSequence([cfg.seed & 0xFFFFFFFFFFFFFFFF, 0x5EED, round_no])
        )
        x = greedy_start(q, rng)
        e = q.energy(x)
        if found is None:
            found = SampleSet([Sample(x, e)])
        x, e, it = _descend(q, cfg, x, e, rng, deadline, stall_limit, it, round_no)
        found = dedup_insert(found, Sample(x, e), cfg.target_samples)
        round_no += 1
        # without a time budget a single round is run; with one, the budget is
        # spent on further rounds from fresh greedy starts
        if deadline is None or time.perf_counter() >= deadline:
            return found


def _descend(q, cfg, x, best, rng, deadline, stall_limit, it, round_no):
    n = q.n_vars
    size = cfg.subproblem_size
    idx = np.arange(n)
    recent: deque[str] = deque(maxlen=cfg.subset_memory)
    stall = 0
    while stall < stall_limit:
        if deadline is not None and time.perf_counter() >= deadline:
            break
        ranking = np.lexsort((idx, -np.abs(q.flip_deltas(x))))
        subset = None
        for lo in range(0, n, size):
            block = ranking[lo:lo + size]
            if block.size < size:
                block = ranking[-size:]
            if _fingerprint(block) not in recent:
                subset = block
                break
        if subset is None:
            # every ranked block was tried recently: explore a random block
            subset = np.sort(rng.choice(n, size, replace=False))
        fp = _fingerprint(subset)
        recent.append(fp)

        sub = extract_subqubo(q, x, subset)
        if subset.size <= EXACT_SUBPROBLEM_LIMIT:
            y = brute_force(sub).first.bits
        else:
            remaining = None if deadline is None else max(deadline - time.perf_counter(), 1e-3)
            limits = [t for t in (cfg.inner.time_limit, remaining) if t is not None]
            inner = replace(
                cfg.inner,
                seed=_derived_seed(cfg.seed, round_no, it),
                time_limit=min(limits) if limits else None,
            )
            y = sample_qubo(sub, inner).first.bits
        cand = x.copy()
        cand[subset] = y
        e = q.energy(cand)
        accepted = e < best - 1e-9 * (1.0 + abs(best))
        if accepted:
            x, best = cand, e
            stall = 0
        else:
            stall += 1
        log.info(
            "round=%d iteration=%d best_energy=%r subset=%s accepted=%d",
            round_no, it, best, fp, int(accepted),
        )
        it += 1
    return x, best, it
