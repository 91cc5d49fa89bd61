"""Numba kernels for GF(2) boundary-matrix column reduction.

Columns live in a growable int64 pool as sorted row-index runs; adding two
columns is a sorted symmetric-difference merge.  The kernel processes one
dimension at a time so the caller can run dimensions top-down and clear
columns already known to be positive (the twist optimization).

When ``track_v`` is set the kernel also maintains the V columns of the
R = D.V decomposition; the V column of a zero-reduced column is a cycle
representative for the class that column creates.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _sym_diff(a, alen, pool, ps, plen, out):
    """out = sorted symmetric difference of a[:alen] and pool[ps:ps+plen]."""
    i = 0
    k = 0
    o = 0
    while i < alen and k < plen:
        x = a[i]
        y = pool[ps + k]
        if x < y:
            out[o] = x
            o += 1
            i += 1
        elif y < x:
            out[o] = y
            o += 1
            k += 1
        else:
            i += 1
            k += 1
    while i < alen:
        out[o] = a[i]
        o += 1
        i += 1
    while k < plen:
        out[o] = pool[ps + k]
        o += 1
        k += 1
    return o


@njit(cache=True)
def _reduce_boundary(bnd, cleared, n_rows, track_v):
    """Reduce the boundary columns of one dimension, in filtration order.

    bnd: (m, width) sorted face row indices, -1 padding.
    cleared: columns to skip (known positive from the dimension above).

    Returns pivot_col (row -> negative column owning that low, -1 if none),
    positive flags, and the stored R / V columns as (start, len, pool)
    triples indexed by column.
    """
    m, width = bnd.shape
    pivot_col = np.full(n_rows, -1, dtype=np.int64)
    positive = np.zeros(m, dtype=np.bool_)

    r_start = np.full(m, -1, dtype=np.int64)
    r_len = np.zeros(m, dtype=np.int64)
    r_pool = np.empty(max(4 * m, 16), dtype=np.int64)
    r_used = 0

    v_start = np.full(m, -1, dtype=np.int64)
    v_len = np.zeros(m, dtype=np.int64)
    v_pool = np.empty(max(4 * m, 16) if track_v else 16, dtype=np.int64)
    v_used = 0

    cur = np.empty(256, dtype=np.int64)
    tmp = np.empty(256, dtype=np.int64)
    vcur = np.empty(256, dtype=np.int64)
    vtmp = np.empty(256, dtype=np.int64)

    for j in range(m):
        if cleared[j]:
            continue
        cl = 0
        for t in range(width):
            r = bnd[j, t]
            if r >= 0:
                cur[cl] = r
                cl += 1
        vl = 1
        vcur[0] = j

        while True:
            if cl == 0:
                positive[j] = True
                if track_v:
                    need = v_used + vl
                    if need > v_pool.shape[0]:
                        v_pool = _grow(v_pool, need)
                    v_start[j] = v_used
                    v_len[j] = vl
                    v_pool[v_used : v_used + vl] = vcur[:vl]
                    v_used = need
                break
            low = cur[cl - 1]
            k = pivot_col[low]
            if k == -1:
                pivot_col[low] = j
                need = r_used + cl
                if need > r_pool.shape[0]:
                    r_pool = _grow(r_pool, need)
                r_start[j] = r_used
                r_len[j] = cl
                r_pool[r_used : r_used + cl] = cur[:cl]
                r_used = need
                if track_v:
                    need = v_used + vl
                    if need > v_pool.shape[0]:
                        v_pool = _grow(v_pool, need)
                    v_start[j] = v_used
                    v_len[j] = vl
                    v_pool[v_used : v_used + vl] = vcur[:vl]
                    v_used = need
                break
            ks = r_start[k]
            kl = r_len[k]
            if cl + kl > tmp.shape[0]:
                tmp = np.empty(max(2 * tmp.shape[0], cl + kl), dtype=np.int64)
            cl = _sym_diff(cur, cl, r_pool, ks, kl, tmp)
            cur, tmp = tmp, cur
            if track_v:
                vs = v_start[k]
                vkl = v_len[k]
                if vl + vkl > vtmp.shape[0]:
                    vtmp = np.empty(max(2 * vtmp.shape[0], vl + vkl), dtype=np.int64)
                vl = _sym_diff(vcur, vl, v_pool, vs, vkl, vtmp)
                vcur, vtmp = vtmp, vcur

    return (
        pivot_col,
        positive,
        r_start,
        r_len,
        r_pool[:r_used],
        v_start,
        v_len,
        v_pool[:v_used],
    )


@njit(cache=True)
def _grow(pool, need):
    new = np.empty(max(2 * pool.shape[0], need), dtype=np.int64)
    new[: pool.shape[0]] = pool
    return new
