"""QUBO models, energy evaluation and an exhaustive oracle.

A :class:`Qubo` minimises ``sum_{i<=j} Q_ij x_i x_j + offset`` over binary x.
Coefficients are held in two parts:

* sparse upper-triangular entries (diagonal plus ``i < j`` couplings), and
* squared linear terms ``w * (a . x - b)^2`` kept factored.

Expanding a squared term over k variables produces k^2/2 couplings, so the
balance penalty of a bipartition QUBO would make it dense. Keeping it
factored leaves energies and flip deltas identical while storage stays
linear in the graph size. :meth:`Qubo.coefficient`, :attr:`Qubo.entries` and
:meth:`Qubo.to_dense` expose the expanded upper-triangular view.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .samples import Sample, SampleSet

BRUTE_FORCE_LIMIT = 24


@dataclass(frozen=True, eq=False)
class SquaredTerm:
    """``weight * (sum_k coefs[k] * x[indices[k]] - rhs) ** 2``."""

    weight: float
    indices: np.ndarray
    coefs: np.ndarray
    rhs: float

    def __post_init__(self) -> None:
        idx = np.array(self.indices, dtype=np.int64)
        coefs = np.array(self.coefs, dtype=np.float64)
        if idx.shape != coefs.shape or idx.ndim != 1:
            raise ValueError("indices and coefs must be matching 1-d sequences")
        if np.unique(idx).size != idx.size:
            raise ValueError("squared term indices must be distinct")
        if self.weight < 0:
            raise ValueError("squared term weight must be nonnegative")
        idx.flags.writeable = False
        coefs.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coefs", coefs)
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "rhs", float(self.rhs))

    def value(self, x: np.ndarray) -> float:
        r = float(self.coefs @ x[self.indices]) - self.rhs
        return self.weight * r * r


class Qubo:
    """Immutable QUBO over ``n_vars`` binary variables."""

    def __init__(
        self,
        n_vars: int,
        entries: Mapping[tuple[int, int], float] | None = None,
        offset: float = 0.0,
        squared_terms: Iterable[SquaredTerm] = (),
    ) -> None:
        rows: list[int] = []
        cols: list[int] = []
        vals: list[float] = []
        for (i, j), c in (entries or {}).items():
            rows.append(i)
            cols.append(j)
            vals.append(c)
        self._init(
            n_vars,
            np.array(rows, dtype=np.int64),
            np.array(cols, dtype=np.int64),
            np.array(vals, dtype=np.float64),
            offset,
            squared_terms,
        )

    @classmethod
    def from_arrays(
        cls,
        n_vars: int,
        rows: np.ndarray,
        cols: np.ndarray,
        vals: np.ndarray,
        offset: float = 0.0,
        squared_terms: Iterable[SquaredTerm] = (),
    ) -> "Qubo":
        """Build from coordinate arrays; repeated ``(i, j)`` pairs are summed."""
        q = cls.__new__(cls)
        q._init(
            n_vars,
            np.asarray(rows, dtype=np.int64),
            np.asarray(cols, dtype=np.int64),
            np.asarray(vals, dtype=np.float64),
            offset,
            squared_terms,
            accumulate=True,
        )
        return q

    def _init(self, n_vars, rows, cols, vals, offset, squared_terms, accumulate=False) -> None:
        if n_vars < 0:
            raise ValueError("n_vars must be nonnegative")
        self.n_vars = int(n_vars)
        self.base_offset = float(offset)
        if rows.size:
            if (rows > cols).any():
                raise ValueError("entries must satisfy i <= j (upper-triangular storage)")
            if rows.min() < 0 or cols.max() >= n_vars:
                raise IndexError("entry index out of range")
        if accumulate and rows.size:
            key = rows * n_vars + cols
            uniq, inv = np.unique(key, return_inverse=True)
            vals = np.bincount(inv, weights=vals, minlength=uniq.size)
            rows, cols = uniq // n_vars, uniq % n_vars
        diag_mask = rows == cols
        self._diag = np.zeros(self.n_vars)
        np.add.at(self._diag, rows[diag_mask], vals[diag_mask])
        off = ~diag_mask & (vals != 0)
        order = np.lexsort((cols[off], rows[off]))
        self._rows = rows[off][order]
        self._cols = cols[off][order]
        self._vals = vals[off][order]
        terms = []
        for t in squared_terms:
            if t.indices.size and (t.indices.min() < 0 or t.indices.max() >= n_vars):
                raise IndexError("squared term index out of range")
            if t.weight == 0:
                continue
            if np.any(t.coefs != 0):
                terms.append(t)
            else:
                self.base_offset += t.weight * t.rhs**2
        self.squared_terms: tuple[SquaredTerm, ...] = tuple(terms)
        for arr in (self._diag, self._rows, self._cols, self._vals):
            arr.flags.writeable = False

    def __repr__(self) -> str:
        return (
            f"Qubo(n_vars={self.n_vars}, sparse_couplings={self._vals.size}, "
            f"squared_terms={len(self.squared_terms)}, offset={self.offset:g})"
        )

    # -- expanded coefficient view -------------------------------------------------

    @cached_property
    def _expanded_diag(self) -> np.ndarray:
        d = self._diag.copy()
        for t in self.squared_terms:
            d[t.indices] += t.weight * (t.coefs**2 - 2.0 * t.rhs * t.coefs)
        return d

    @property
    def offset(self) -> float:
        """Constant of the expanded form: base offset plus each ``w * b^2``."""
        return self.base_offset + sum(t.weight * t.rhs**2 for t in self.squared_terms)

    def coefficient(self, i: int, j: int) -> float:
        """Expanded upper-triangular coefficient ``Q_ij`` (``i <= j``)."""
        if i > j:
            raise ValueError("coefficient is defined for i <= j only")
        if not (0 <= i and j < self.n_vars):
            raise IndexError("index out of range")
        if i == j:
            return float(self._expanded_diag[i])
        c = 0.0
        k = np.searchsorted(self._rows * self.n_vars + self._cols, i * self.n_vars + j)
        if k < self._rows.size and self._rows[k] == i and self._cols[k] == j:
            c += float(self._vals[k])
        for t in self.squared_terms:
            pi = np.flatnonzero(t.indices == i)
            pj = np.flatnonzero(t.indices == j)
            if pi.size and pj.size:
                c += 2.0 * t.weight * float(t.coefs[pi[0]] * t.coefs[pj[0]])
        return c

    def to_dense(self) -> np.ndarray:
        """Expanded upper-triangular coefficient matrix (diagonal = linear terms)."""
        n = self.n_vars
        m = np.zeros((n, n))
        m[np.diag_indices(n)] = self._expanded_diag
        np.add.at(m, (self._rows, self._cols), self._vals)
        for t in self.squared_terms:
            order = np.argsort(t.indices)
            idx, a = t.indices[order], t.coefs[order]
            outer = 2.0 * t.weight * np.outer(a, a)
            iu = np.triu_indices(idx.size, 1)
            np.add.at(m, (idx[iu[0]], idx[iu[1]]), outer[iu])
        return m

    @property
    def entries(self) -> dict[tuple[int, int], float]:
        """Expanded nonzero coefficients as ``{(i, j): Q_ij}`` with ``i <= j``.

        This materialises every coupling of the squared terms; use it on
        small models only.
        """
        dense = self.to_dense()
        ii, jj = np.nonzero(dense)
        return {(int(i), int(j)): float(dense[i, j]) for i, j in zip(ii, jj)}

    def symmetric_dense(self) -> np.ndarray:
        """Off-diagonal couplings split symmetrically: ``W_ij = W_ji = Q_ij / 2``.

        With the diagonal ``d = diag(Q)``, ``x.W.x + d.x + offset`` is the same
        energy as the upper-triangular form.
        """
        up = np.triu(self.to_dense(), 1)
        return (up + up.T) / 2.0

    # -- evaluation ----------------------------------------------------------------

    def _as_bits(self, bits) -> np.ndarray:
        x = np.asarray(bits.bits if isinstance(bits, Sample) else bits)
        if x.shape != (self.n_vars,):
            raise ValueError(f"expected {self.n_vars} bits, got shape {x.shape}")
        return x.astype(np.float64)

    def energy(self, bits: Sequence[int] | np.ndarray) -> float:
        return float(self.energies(self._as_bits(bits)[None, :])[0])

    def energies(self, bits_matrix: np.ndarray) -> np.ndarray:
        """Energies of each row of a ``(k, n_vars)`` 0/1 matrix.

        Each row is reduced on its own, so a row's energy does not depend on
        which other rows it is evaluated with.
        """
        x = np.asarray(bits_matrix, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_vars:
            raise ValueError("bits_matrix must have shape (k, n_vars)")
        out = np.empty(x.shape[0])
        block = max(1, 2_000_000 // max(1, self.n_vars + self._vals.size))
        for lo in range(0, x.shape[0], block):
            xb = x[lo : lo + block]
            e = self.base_offset + (xb * self._diag).sum(axis=1)
            if self._vals.size:
                e += (xb[:, self._rows] * xb[:, self._cols] * self._vals).sum(axis=1)
            for t in self.squared_terms:
                r = (xb[:, t.indices] * t.coefs).sum(axis=1) - t.rhs
                e += t.weight * r * r
            out[lo : lo + block] = e
        return out

    def local_fields(self, bits) -> np.ndarray:
        """``diag + W x`` for the sparse part (squared terms excluded)."""
        x = self._as_bits(bits)
        h = self._diag.copy()
        if self._vals.size:
            h += np.bincount(self._rows, self._vals * x[self._cols], minlength=self.n_vars)
            h += np.bincount(self._cols, self._vals * x[self._rows], minlength=self.n_vars)
        return h

    def term_sums(self, bits) -> np.ndarray:
        x = self._as_bits(bits)
        return np.array([float(t.coefs @ x[t.indices]) for t in self.squared_terms])

    def flip_deltas(self, bits) -> np.ndarray:
        """Energy change of flipping each variable, computed from scratch."""
        x = self._as_bits(bits)
        d = 1.0 - 2.0 * x
        out = d * self.local_fields(x)
        for t in self.squared_terms:
            s = float(t.coefs @ x[t.indices])
            a = t.coefs
            out[t.indices] += t.weight * (2.0 * a * d[t.indices] * (s - t.rhs) + a * a)
        return out

    def flip_delta(self, bits, i: int) -> float:
        """``energy(bits with i flipped) - energy(bits)`` touching only terms on ``i``."""
        if not 0 <= i < self.n_vars:
            raise IndexError(f"variable {i} out of range for n_vars={self.n_vars}")
        x = self._as_bits(bits)
        k = self._kernel
        d = 1.0 - 2.0 * x[i]
        lo, hi = k.indptr[i], k.indptr[i + 1]
        h = self._diag[i] + float(k.data[lo:hi] @ x[k.indices[lo:hi]])
        delta = d * h
        for p in range(k.v_ptr[i], k.v_ptr[i + 1]):
            t = self.squared_terms[k.v_term[p]]
            a = k.v_coef[p]
            s = float(t.coefs @ x[t.indices])
            delta += t.weight * (2.0 * a * d * (s - t.rhs) + a * a)
        return float(delta)

    @cached_property
    def _kernel(self) -> "KernelData":
        return KernelData.build(self)


@dataclass(frozen=True)
class KernelData:
    """Flat arrays consumed by the compiled kernels."""

    diag: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    t_w: np.ndarray
    t_rhs: np.ndarray
    v_ptr: np.ndarray
    v_term: np.ndarray
    v_coef: np.ndarray

    @classmethod
    def build(cls, q: Qubo) -> "KernelData":
        n = q.n_vars
        r = np.concatenate([q._rows, q._cols])
        c = np.concatenate([q._cols, q._rows])
        v = np.concatenate([q._vals, q._vals])
        order = np.lexsort((c, r))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(r, minlength=n), out=indptr[1:])
        terms = q.squared_terms
        if terms:
            tv = np.concatenate([t.indices for t in terms])
            tt = np.concatenate([np.full(t.indices.size, k, dtype=np.int64) for k, t in enumerate(terms)])
            ta = np.concatenate([t.coefs for t in terms])
        else:
            tv = tt = np.zeros(0, dtype=np.int64)
            ta = np.zeros(0)
        torder = np.lexsort((tt, tv))
        v_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(tv, minlength=n), out=v_ptr[1:])
        return cls(
            diag=q._diag,
            indptr=indptr,
            indices=c[order].astype(np.int64),
            data=v[order].astype(np.float64),
            t_w=np.array([t.weight for t in terms], dtype=np.float64),
            t_rhs=np.array([t.rhs for t in terms], dtype=np.float64),
            v_ptr=v_ptr,
            v_term=tt[torder].astype(np.int64),
            v_coef=ta[torder].astype(np.float64),
        )


def brute_force(q: Qubo, lowest: int | None = None) -> SampleSet:
    """Enumerate all ``2**n_vars`` assignments.

    By default returns every assignment attaining the minimum energy. With
    ``lowest=k`` returns the k lowest-energy assignments instead.
    """
    n = q.n_vars
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute_force is limited to {BRUTE_FORCE_LIMIT} variables, got {n}")
    if n == 0:
        return SampleSet([Sample(np.zeros(0, dtype=np.uint8), q.energy(np.zeros(0)))])
    dense = q.to_dense()
    diag = np.ascontiguousarray(np.diag(dense))
    up = np.triu(dense, 1)
    energies = _kernels.gray_code_energies(diag, up + up.T, q.offset)
    emin = energies.min()
    if lowest is None:
        cand = np.flatnonzero(energies <= emin + 1e-6 * (1.0 + abs(emin)))
    else:
        k = min(int(lowest), energies.size)
        cand = np.argpartition(energies, k - 1)[:k] if k < energies.size else np.arange(energies.size)
    bits = ((cand[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    exact = q.energies(bits)
    if lowest is None:
        best = exact.min()
        keep = exact <= best + 1e-9 * (1.0 + abs(best))
        bits, exact = bits[keep], exact[keep]
    return SampleSet(Sample(b, e) for b, e in zip(bits, exact))


def write_qubo(q: Qubo) -> str:
    """Line-oriented text: header ``n_vars offset`` then ``i j coeff`` per entry."""
    lines = [f"{q.n_vars} {q.offset!r}"]
    lines.extend(f"{i} {j} {c!r}" for (i, j), c in sorted(q.entries.items()))
    return "\n".join(lines) + "\n"


def read_qubo(text: str) -> Qubo:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise ValueError("empty QUBO text")
    n, offset = int(rows[0][0]), float(rows[0][1])
    entries: dict[tuple[int, int], float] = {}
    for parts in rows[1:]:
        i, j, c = int(parts[0]), int(parts[1]), float(parts[2])
        if (i, j) in entries:
            raise ValueError(f"duplicate entry ({i}, {j})")
        entries[(i, j)] = c
    return Qubo(n, entries, offset)
