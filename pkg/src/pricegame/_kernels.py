"""Integer kernels for the exhaustive scans, with numba and numpy backends.

Everything here works on *scaled integers*: callers put all values, prices,
costs and weights over a common denominator so that every comparison the
kernels make is exact int64 arithmetic. The numba backend jit-compiles a
per-profile loop; the numpy backend vectorizes the same logic over profile
chunks. Outputs are bit-identical between backends.

Backend selection: environment variable PRICEGAME_BACKEND = "numba" |
"numpy". Default is numba when importable, else numpy.

Profile indexing for grid scans: profiles enumerate the grid in odometer
order with seller 0 the most significant digit, i.e. profile `idx` has
p_i = grid[(idx // g**(n-1-i)) % g].
"""

from __future__ import annotations

import os
from typing import Optional, Sequence

import numpy as np

_ENV = "PRICEGAME_BACKEND"
_NEG = -(1 << 62)
_BIGKEY = 1 << 62


def _detect_backend() -> str:
    choice = os.environ.get(_ENV, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        import numba  # noqa: F401  (fail loudly if explicitly requested)

        return "numba"
    if choice:
        raise ValueError(f"{_ENV} must be 'numba' or 'numpy', got {choice!r}")
    try:
        import numba  # noqa: F401

        return "numba"
    except ImportError:
        return "numpy"


BACKEND = _detect_backend()


def backend() -> str:
    return BACKEND


# ---------------------------------------------------------------------------
# static tables
# ---------------------------------------------------------------------------


def lsb_table(n: int) -> np.ndarray:
    """lsb_table[s] = index of the lowest set bit of s (0 for s=0)."""
    nsub = 1 << n
    out = np.zeros(nsub, dtype=np.int64)
    for i in range(n):
        out[1 << i :: 1 << (i + 1)] = i
    return out


def lex_key_table(n: int, order: Sequence[int]) -> np.ndarray:
    """lex rank of every subset under the priority permutation (smaller =
    earlier; supersets rank before subsets)."""
    s = np.arange(1 << n, dtype=np.int64)
    key = np.zeros(1 << n, dtype=np.int64)
    for pos, item in enumerate(order):
        absent = 1 - ((s >> item) & 1)
        key |= absent << (n - 1 - pos)
    return key


def member_matrix(n: int) -> np.ndarray:
    """(n, 2^n) int64 membership matrix: member[i, s] = 1 iff i in s."""
    s = np.arange(1 << n, dtype=np.int64)
    return ((s[None, :] >> np.arange(n, dtype=np.int64)[:, None]) & 1).astype(np.int64)


def subset_sums_np(price_ints: np.ndarray) -> np.ndarray:
    """Sum of prices over every subset, by doubling."""
    n = price_ints.shape[0]
    out = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        half = out[: 1 << i]
        out[1 << i : 1 << (i + 1)] = half + price_ints[i]
    return out


def revenue_table_np(table_ints: np.ndarray, n: int) -> np.ndarray:
    """r(S) = sum_{i in S} (v(S) - v(S-i)) for every subset, vectorized."""
    s = np.arange(1 << n, dtype=np.int64)
    pop = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pop += (s >> i) & 1
    acc = pop * table_ints
    for i in range(n):
        with_i = ((s >> i) & 1) == 1
        acc[with_i] -= table_ints[s[with_i] ^ (1 << i)]
    return acc


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if BACKEND == "numba":
    from numba import njit

    @njit(cache=True)
    def _subset_sums_nb(price_ints, lsb):  # pragma: no cover - exercised via wrapper
        n = price_ints.shape[0]
        nsub = 1 << n
        out = np.zeros(nsub, dtype=np.int64)
        for s in range(1, nsub):
            out[s] = out[s & (s - 1)] + price_ints[lsb[s]]
        return out

    @njit(cache=True)
    def _revenue_table_nb(table_ints, n):  # pragma: no cover
        nsub = 1 << n
        out = np.zeros(nsub, dtype=np.int64)
        for s in range(nsub):
            acc = 0
            for i in range(n):
                if (s >> i) & 1:
                    acc += table_ints[s] - table_ints[s ^ (1 << i)]
            out[s] = acc
        return out

    @njit(cache=True)
    def _scan_nb(
        tables,
        weights,
        costs,
        grid,
        greedy,
        lexkey,
        order,
        lsb,
        out_gain,
        out_seller,
        out_thresh,
        out_sup,
    ):  # pragma: no cover
        m, nsub = tables.shape
        n = costs.shape[0]
        g = grid.shape[0]
        total = out_gain.shape[0]
        digits = np.zeros(n, np.int64)
        p = np.empty(n, np.int64)
        for i in range(n):
            p[i] = grid[0]
        psum = np.zeros(nsub, np.int64)
        util = np.zeros((m, nsub), np.int64)
        chosen = np.zeros(m, np.int64)
        amax = np.zeros((m, n), np.int64)
        bmax = np.zeros((m, n), np.int64)
        for idx in range(total):
            for s in range(1, nsub):
                psum[s] = psum[s & (s - 1)] + p[lsb[s]]
            for k in range(m):
                best = _NEG
                for s in range(nsub):
                    u = tables[k, s] - psum[s]
                    util[k, s] = u
                    if u > best:
                        best = u
                if greedy:
                    sset = 0
                    while True:
                        bg = _NEG
                        bi = -1
                        for pos in range(n):
                            it = order[pos]
                            if (sset >> it) & 1 == 0:
                                gn = (
                                    tables[k, sset | (1 << it)]
                                    - tables[k, sset]
                                    - p[it]
                                )
                                if gn > bg:
                                    bg = gn
                                    bi = it
                        if bi < 0 or bg < 0:
                            break
                        sset |= 1 << bi
                    chosen[k] = sset
                else:
                    bestkey = _BIGKEY
                    pick = 0
                    for s in range(nsub):
                        if util[k, s] == best and lexkey[s] < bestkey:
                            bestkey = lexkey[s]
                            pick = s
                    chosen[k] = pick
                for i in range(n):
                    amax[k, i] = _NEG
                    bmax[k, i] = _NEG
                for s in range(nsub):
                    u = util[k, s]
                    for i in range(n):
                        if (s >> i) & 1:
                            if u > amax[k, i]:
                                amax[k, i] = u
                        else:
                            if u > bmax[k, i]:
                                bmax[k, i] = u
            maxgain = _NEG
            argseller = -1
            argthresh = 0
            argsup = 0
            for i in range(n):
                u_i = 0
                for k in range(m):
                    if (chosen[k] >> i) & 1:
                        u_i += weights[k] * (p[i] - costs[i])
                sup = 0
                bthr = 0
                for k in range(m):
                    t0 = amax[k, i] + p[i] - bmax[k, i]
                    w = 0
                    for k2 in range(m):
                        if amax[k2, i] + p[i] - bmax[k2, i] >= t0:
                            w += weights[k2]
                    val = (t0 - costs[i]) * w
                    if val > sup:
                        sup = val
                        bthr = t0
                gain = sup - u_i
                if gain > maxgain:
                    maxgain = gain
                    argseller = i
                    argthresh = bthr
                    argsup = sup
            out_gain[idx] = maxgain
            out_seller[idx] = argseller
            out_thresh[idx] = argthresh
            out_sup[idx] = argsup
            d = n - 1
            while d >= 0:
                digits[d] += 1
                if digits[d] < g:
                    p[d] = grid[digits[d]]
                    break
                digits[d] = 0
                p[d] = grid[0]
                d -= 1


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------


def _greedy_np(table_k: np.ndarray, pmat: np.ndarray, order: np.ndarray) -> np.ndarray:
    nprof, n = pmat.shape
    bits = (1 << np.arange(n, dtype=np.int64))[None, :]
    orderpos = np.empty(n, dtype=np.int64)
    orderpos[order] = np.arange(n, dtype=np.int64)
    item_of_pos = np.concatenate([order, np.zeros(1, dtype=np.int64)])
    s = np.zeros(nprof, dtype=np.int64)
    done = np.zeros(nprof, dtype=bool)
    for _ in range(n):
        gains = table_k[s[:, None] | bits] - table_k[s][:, None] - pmat
        in_s = (s[:, None] & bits) != 0
        gains = np.where(in_s, _NEG, gains)
        gmax = gains.max(axis=1)
        cand = gains == gmax[:, None]
        pos = np.where(cand, orderpos[None, :], n).min(axis=1)
        item = item_of_pos[pos]
        active = ~done & (gmax >= 0)
        s = np.where(active, s | (np.int64(1) << item), s)
        done |= ~active
        if done.all():
            break
    return s


def _scan_np(
    tables: np.ndarray,
    weights: np.ndarray,
    costs: np.ndarray,
    grid: np.ndarray,
    greedy: bool,
    lexkey: np.ndarray,
    order: np.ndarray,
    chunk: int = 1 << 14,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    m, nsub = tables.shape
    n = costs.shape[0]
    g = grid.shape[0]
    total = g**n
    member = member_matrix(n)  # (n, nsub)
    with_i = member.astype(bool)
    inv_key = np.empty(nsub, dtype=np.int64)
    inv_key[lexkey] = np.arange(nsub, dtype=np.int64)
    radix = g ** (n - 1 - np.arange(n, dtype=np.int64))
    out_gain = np.empty(total, dtype=np.int64)
    out_seller = np.empty(total, dtype=np.int64)
    out_thresh = np.empty(total, dtype=np.int64)
    out_sup = np.empty(total, dtype=np.int64)
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        idx = np.arange(lo, hi, dtype=np.int64)
        nprof = hi - lo
        pmat = grid[(idx[:, None] // radix[None, :]) % g]  # (nprof, n)
        psum = pmat @ member  # (nprof, nsub)
        u_sell = np.zeros((nprof, n), dtype=np.int64)
        sup = np.zeros((nprof, n), dtype=np.int64)
        bthr = np.zeros((nprof, n), dtype=np.int64)
        thresh = np.empty((nprof, m, n), dtype=np.int64)
        for k in range(m):
            util = tables[k][None, :] - psum
            best = util.max(axis=1)
            if greedy:
                chosen = _greedy_np(tables[k], pmat, order)
            else:
                keymin = np.where(util == best[:, None], lexkey[None, :], _BIGKEY).min(
                    axis=1
                )
                chosen = inv_key[keymin]
            selbits = (chosen[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
            u_sell += weights[k] * selbits * (pmat - costs[None, :])
            for i in range(n):
                a = util[:, with_i[i]].max(axis=1)
                b = util[:, ~with_i[i]].max(axis=1)
                thresh[:, k, i] = a + pmat[:, i] - b
        for i in range(n):
            t_i = thresh[:, :, i]  # (nprof, m)
            for k0 in range(m):
                t0 = t_i[:, k0]
                w = ((t_i >= t0[:, None]) * weights[None, :]).sum(axis=1)
                val = (t0 - costs[i]) * w
                better = val > sup[:, i]
                sup[better, i] = val[better]
                bthr[better, i] = t0[better]
        gains = sup - u_sell
        best_seller = gains.argmax(axis=1)
        rows = np.arange(nprof)
        out_gain[lo:hi] = gains[rows, best_seller]
        out_seller[lo:hi] = best_seller
        out_thresh[lo:hi] = bthr[rows, best_seller]
        out_sup[lo:hi] = sup[rows, best_seller]
    return out_gain, out_seller, out_thresh, out_sup


# ---------------------------------------------------------------------------
# public dispatchers
# ---------------------------------------------------------------------------


def subset_sums(price_ints: np.ndarray, backend_name: Optional[str] = None) -> np.ndarray:
    which = backend_name or BACKEND
    if which == "numba" and BACKEND == "numba":
        n = price_ints.shape[0]
        return _subset_sums_nb(price_ints, lsb_table(n))
    return subset_sums_np(price_ints)


def revenue_table(
    table_ints: np.ndarray, n: int, backend_name: Optional[str] = None
) -> np.ndarray:
    which = backend_name or BACKEND
    if which == "numba" and BACKEND == "numba":
        return _revenue_table_nb(table_ints, n)
    return revenue_table_np(table_ints, n)


def scan_grid(
    tables: np.ndarray,
    weights: np.ndarray,
    costs: np.ndarray,
    grid: np.ndarray,
    greedy: bool,
    order: Sequence[int],
    backend_name: Optional[str] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per grid profile: (max deviation gain, best seller, its threshold, its sup).

    Gains are in scaled seller-utility units (price-denominator times weight
    denominator); thresholds in scaled price units. A sup of 0 means the best
    deviation for that seller is not to sell at all.
    """
    n = costs.shape[0]
    order_arr = np.asarray(order, dtype=np.int64)
    lexkey = lex_key_table(n, order)
    which = backend_name or BACKEND
    if which == "numba" and BACKEND == "numba":
        total = int(grid.shape[0]) ** n
        out_gain = np.empty(total, dtype=np.int64)
        out_seller = np.empty(total, dtype=np.int64)
        out_thresh = np.empty(total, dtype=np.int64)
        out_sup = np.empty(total, dtype=np.int64)
        _scan_nb(
            tables,
            weights,
            costs,
            grid,
            greedy,
            lexkey,
            order_arr,
            lsb_table(n),
            out_gain,
            out_seller,
            out_thresh,
            out_sup,
        )
        return out_gain, out_seller, out_thresh, out_sup
    return _scan_np(tables, weights, costs, grid, greedy, lexkey, order_arr)
