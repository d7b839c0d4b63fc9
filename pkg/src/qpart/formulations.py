"""Graph-bipartition models: the direct QUBO and the constrained formulation.

Direct QUBO, one bit per vertex (bit = part label)::

    H(x) = alpha * sum_{(u,v) in E} (x_u + x_v - 2 x_u x_v)
         + beta  * (sum_v x_v - n/2)^2

Constrained formulation, two bits per vertex (``x[2v + p]`` = vertex v in
part p): one-hot per vertex, ``ceil(n/2)`` vertices in part 0, and the cut
``sum_E (1 - x_{u,0} x_{v,0} - x_{u,1} x_{v,1})`` as objective.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .graph import Graph, Partition
from .qubo import Qubo, SquaredTerm
from .samples import Sample


class InfeasibleDecodeError(ValueError):
    """Bits violate the one-hot encoding and cannot be read as a partition."""


def build_bipartition_qubo(g: Graph, alpha: float = 1.0, beta: float = 1.0) -> Qubo:
    """Cut-plus-balance QUBO over one variable per vertex.

    Expanded coefficients: ``Q_vv = alpha*deg(v) + beta*(1 - n)``,
    ``Q_uv = 2*beta - 2*alpha`` on edges and ``2*beta`` otherwise, offset
    ``beta*n^2/4``. Every pair of vertices is coupled, so the model is dense;
    the balance square is kept factored (see :mod:`qpart.qubo`).
    """
    if g.n == 0:
        raise ValueError("cannot build a QUBO for an empty graph")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    n = g.n
    e = g.edge_array
    rows = np.concatenate([np.arange(n), e[:, 0]])
    cols = np.concatenate([np.arange(n), e[:, 1]])
    vals = np.concatenate([alpha * g.degrees.astype(np.float64), np.full(len(e), -2.0 * alpha)])
    balance = SquaredTerm(beta, np.arange(n), np.ones(n), n / 2.0)
    return Qubo.from_arrays(n, rows, cols, vals, 0.0, [balance])


def decode_partition(g: Graph, sample: Sample | Sequence[int] | np.ndarray) -> Partition:
    bits = sample.bits if isinstance(sample, Sample) else np.asarray(sample)
    if len(bits) != g.n:
        raise ValueError(f"sample has {len(bits)} bits, graph has {g.n} vertices")
    return Partition.from_bits(bits)


@dataclass(frozen=True, eq=False)
class LinearConstraint:
    """``sum_k coefs[k] * x[indices[k]] == rhs``."""

    indices: tuple[int, ...]
    coefs: tuple[float, ...]
    rhs: float

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.coefs):
            raise ValueError("indices and coefs differ in length")

    def lhs(self, x: np.ndarray) -> float:
        return float(np.dot(self.coefs, x[list(self.indices)])) if self.indices else 0.0


@dataclass(frozen=True, eq=False)
class QuadraticObjective:
    linear: Mapping[int, float] = field(default_factory=dict)
    quadratic: Mapping[tuple[int, int], float] = field(default_factory=dict)
    constant: float = 0.0

    def value(self, x: np.ndarray) -> float:
        v = self.constant
        v += sum(c * x[i] for i, c in self.linear.items())
        v += sum(c * x[i] * x[j] for (i, j), c in self.quadratic.items())
        return float(v)


@dataclass(frozen=True, eq=False)
class ConstrainedProblem:
    """Binary variables, linear equality constraints, quadratic objective."""

    n_vars: int
    constraints: tuple[LinearConstraint, ...]
    objective: QuadraticObjective
    var_names: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        def ok(i: int) -> bool:
            return 0 <= i < self.n_vars

        for c in self.constraints:
            if not all(ok(i) for i in c.indices):
                raise IndexError("constraint references an invalid variable")
        if not all(ok(i) for i in self.objective.linear):
            raise IndexError("objective references an invalid variable")
        for i, j in self.objective.quadratic:
            if not (ok(i) and ok(j)) or i >= j:
                raise IndexError(f"bad objective pair ({i}, {j})")
        if self.var_names and len(self.var_names) != self.n_vars:
            raise ValueError("var_names must name every variable")

    def to_text(self) -> str:
        """Line-oriented dump for logs."""
        out = [f"vars {self.n_vars}"]
        for k, name in enumerate(self.var_names):
            out.append(f"var {k} vertex={name[0]} part={name[1]}")
        for c in self.constraints:
            lhs = " ".join(f"{a:+g}*x{i}" for i, a in zip(c.indices, c.coefs))
            out.append(f"subject_to {lhs} = {c.rhs:g}")
        out.append(f"objective constant {self.objective.constant:g}")
        out.extend(f"objective linear x{i} {c:g}" for i, c in sorted(self.objective.linear.items()))
        out.extend(
            f"objective quadratic x{i} x{j} {c:g}"
            for (i, j), c in sorted(self.objective.quadratic.items())
        )
        return "\n".join(out) + "\n"


def onehot_index(v: int, part: int) -> int:
    return 2 * v + part


def build_constrained_problem(g: Graph) -> ConstrainedProblem:
    if g.n < 2:
        raise ValueError("need at least two vertices to bipartition")
    n = g.n
    constraints = [
        LinearConstraint((onehot_index(v, 0), onehot_index(v, 1)), (1.0, 1.0), 1.0)
        for v in range(n)
    ]
    constraints.append(
        LinearConstraint(tuple(onehot_index(v, 0) for v in range(n)), (1.0,) * n, float((n + 1) // 2))
    )
    quadratic: dict[tuple[int, int], float] = {}
    for u, v in g.edges():
        for p in (0, 1):
            quadratic[(onehot_index(u, p), onehot_index(v, p))] = -1.0
    objective = QuadraticObjective({}, quadratic, float(g.m))
    names = tuple((v, p) for v in range(n) for p in (0, 1))
    return ConstrainedProblem(2 * n, tuple(constraints), objective, names)


def _bits(cp: ConstrainedProblem, bits) -> np.ndarray:
    x = np.asarray(bits.bits if isinstance(bits, Sample) else bits, dtype=np.float64)
    if x.shape != (cp.n_vars,):
        raise ValueError(f"expected {cp.n_vars} bits, got shape {x.shape}")
    return x


def is_feasible(cp: ConstrainedProblem, bits) -> bool:
    x = _bits(cp, bits)
    return all(abs(c.lhs(x) - c.rhs) <= 1e-9 for c in cp.constraints)


def objective_value(cp: ConstrainedProblem, bits) -> float:
    return cp.objective.value(_bits(cp, bits))


def compile_penalty(cp: ConstrainedProblem, alpha: float) -> Qubo:
    """Objective plus ``alpha * (a.x - b)^2`` for every constraint.

    Feasible assignments keep their objective value for every alpha.
    """
    if alpha < 0:
        raise ValueError("penalty weight must be nonnegative")
    entries: dict[tuple[int, int], float] = {(i, i): c for i, c in cp.objective.linear.items()}
    entries.update(cp.objective.quadratic)
    terms = [SquaredTerm(alpha, c.indices, c.coefs, c.rhs) for c in cp.constraints if c.indices]
    offset = cp.objective.constant
    # constraints with no variables still contribute alpha * rhs^2
    offset += sum(alpha * c.rhs**2 for c in cp.constraints if not c.indices)
    return Qubo(cp.n_vars, entries, offset, terms)


def decode_onehot_partition(g: Graph, bits) -> Partition:
    x = np.asarray(bits.bits if isinstance(bits, Sample) else bits)
    if x.shape != (2 * g.n,):
        raise ValueError(f"expected {2 * g.n} bits, got shape {x.shape}")
    pairs = x.reshape(g.n, 2)
    bad = np.flatnonzero(pairs.sum(axis=1) != 1)
    if bad.size:
        raise InfeasibleDecodeError(f"vertex {int(bad[0])} is not assigned to exactly one part")
    return Partition.from_bits(pairs[:, 1])


def encode_onehot_partition(p: Partition) -> np.ndarray:
    a = p.as_array().astype(np.uint8)
    out = np.empty(2 * len(a), dtype=np.uint8)
    out[0::2] = 1 - a
    out[1::2] = a
    return out
