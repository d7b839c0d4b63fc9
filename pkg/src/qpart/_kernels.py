"""Compiled inner loops: single-flip tabu search and Gray-code enumeration.

The QUBO is passed in factored form: a diagonal, a symmetric CSR matrix for
the sparse off-diagonal couplings, and a list of squared linear terms
``w * (a . x - b)^2`` given both term-major (``t_*``) and variable-major
(``v_*``). The local field ``h`` caches ``diag + W x`` and ``s`` caches each
term's ``a . x``; together they give any flip delta in O(terms per var).
"""
from __future__ import annotations

import numpy as np
from numba import njit

_REL_EPS = 1e-12


@njit(cache=True, nogil=True)
def flip_deltas_from_cache(x, h, s, t_w, t_rhs, v_ptr, v_term, v_coef):
    n = x.size
    out = np.empty(n)
    for i in range(n):
        d = 1.0 - 2.0 * x[i]
        delta = d * h[i]
        for k in range(v_ptr[i], v_ptr[i + 1]):
            t = v_term[k]
            a = v_coef[k]
            delta += t_w[t] * (2.0 * a * d * (s[t] - t_rhs[t]) + a * a)
        out[i] = delta
    return out


@njit(cache=True, nogil=True)
def tabu_chunk(
    indptr, indices, data,
    t_w, t_rhs, v_ptr, v_term, v_coef,
    x, h, s, tabu_until, fstate, istate, snaps, snap_e,
    tenure, stall_limit, max_steps,
):
    """Advance one tabu walk by at most ``max_steps`` flips.

    ``fstate = [current energy, best energy]``;
    ``istate = [step, steps since improvement, snapshots taken]``.
    Every strict improvement of the walk's best energy is written into the
    ring buffer ``snaps``/``snap_e``. Returns True once the walk has stalled.
    """
    n = x.size
    cap = snap_e.size
    cur = fstate[0]
    best = fstate[1]
    step = istate[0]
    since = istate[1]
    count = istate[2]
    for _ in range(max_steps):
        if since >= stall_limit:
            break
        eps = _REL_EPS * (1.0 + abs(best))
        bi = -1
        bd = np.inf
        for i in range(n):
            d = 1.0 - 2.0 * x[i]
            delta = d * h[i]
            for k in range(v_ptr[i], v_ptr[i + 1]):
                t = v_term[k]
                a = v_coef[k]
                delta += t_w[t] * (2.0 * a * d * (s[t] - t_rhs[t]) + a * a)
            if tabu_until[i] > step and not (cur + delta < best - eps):
                continue
            if delta < bd:
                bd = delta
                bi = i
        if bi < 0:
            since = stall_limit
            break
        d = 1.0 - 2.0 * x[bi]
        x[bi] = 1 - x[bi]
        cur += bd
        for k in range(indptr[bi], indptr[bi + 1]):
            h[indices[k]] += data[k] * d
        for k in range(v_ptr[bi], v_ptr[bi + 1]):
            s[v_term[k]] += v_coef[k] * d
        step += 1
        tabu_until[bi] = step + tenure
        if cur < best - eps:
            best = cur
            since = 0
            pos = count % cap
            snaps[pos, :] = x
            snap_e[pos] = cur
            count += 1
        else:
            since += 1
    fstate[0] = cur
    fstate[1] = best
    istate[0] = step
    istate[1] = since
    istate[2] = count
    return since >= stall_limit


@njit(cache=True)
def gray_code_energies(diag, w_sym, offset):
    """Energy of every assignment, indexed by the assignment's bitmask.

    ``w_sym`` is the symmetric off-diagonal coupling matrix (zero diagonal).
    """
    n = diag.size
    total = 1 << n
    out = np.empty(total)
    x = np.zeros(n, dtype=np.uint8)
    h = diag.copy()
    e = offset
    out[0] = e
    mask = 0
    for k in range(1, total):
        i = 0
        t = k
        while (t & 1) == 0:
            t >>= 1
            i += 1
        if x[i] == 0:
            e += h[i]
            x[i] = 1
            d = 1.0
        else:
            e -= h[i]
            x[i] = 0
            d = -1.0
        for j in range(n):
            h[j] += w_sym[j, i] * d
        mask ^= 1 << i
        out[mask] = e
    return out
