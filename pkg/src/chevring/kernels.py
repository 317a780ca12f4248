"""Batched matrix kernels behind the finite-group enumerations.

Every kernel exists twice: a numba-compiled version and a plain numpy
version with identical semantics.  CHEVRING_NO_NUMBA=1 (or numba being
absent) selects the numpy path; the active choice is exported as BACKEND
so reports and benchmarks can state which one ran.

Matrices are int64 arrays of ring element indices.  For Zmod the index is
the residue and products reduce mod m; other rings pass their cached
add/mul tables.  Callers guarantee that accumulated dot products fit in
int64, which holds for every ring small enough to enumerate.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:
    numba = None

BACKEND = "numpy" if (numba is None or os.environ.get("CHEVRING_NO_NUMBA")) else "numba"


def ring_data(ring) -> tuple:
    """(modulus, add_table, mul_table) triple the kernels consume.

    modulus > 0 selects plain integer arithmetic mod m; modulus == 0 means
    table-driven arithmetic.
    """
    from .rings import Zmod

    if isinstance(ring, Zmod):
        return (ring.size, None, None)
    return (0, ring.add_table.astype(np.int64), ring.mul_table.astype(np.int64))


# -- numpy versions --------------------------------------------------------


def expand_products_numpy(frontier: np.ndarray, gens: np.ndarray, data) -> np.ndarray:
    """All products frontier[i] * gens[j], flattened to (F*G, d, d)."""
    m, add_t, mul_t = data
    if m:
        out = np.einsum("fij,gjk->fgik", frontier, gens) % m
        return out.reshape(-1, frontier.shape[1], frontier.shape[2])
    f, d = frontier.shape[0], frontier.shape[1]
    g = gens.shape[0]
    # prods[f, g, i, k, j] = frontier[f, i, k] * gens[g, k, j]; reduce over k
    prods = mul_t[frontier[:, None, :, :, None], gens[None, :, None, :, :]]
    acc = prods[:, :, :, 0, :]
    for k in range(1, d):
        acc = add_t[acc, prods[:, :, :, k, :]]
    return acc.reshape(f * g, d, d)


def matmul_batch_numpy(A: np.ndarray, B: np.ndarray, data) -> np.ndarray:
    """Row-wise products A[i] * B[i] for stacks of equal length."""
    m, add_t, mul_t = data
    if m:
        return np.matmul(A, B) % m
    d = A.shape[1]
    # prods[r, i, k, j] = A[r, i, k] * B[r, k, j]; reduce over k
    prods = mul_t[A[:, :, :, None], B[:, None, :, :]]
    acc = prods[:, :, 0, :]
    for k in range(1, d):
        acc = add_t[acc, prods[:, :, k, :]]
    return acc


def pack_keys_numpy(mats: np.ndarray, radix: int) -> np.ndarray:
    """Row-major Horner packing; caller checks radix**(d*d) fits in int64."""
    flat = mats.reshape(mats.shape[0], -1)
    keys = np.zeros(mats.shape[0], dtype=np.int64)
    for col in range(flat.shape[1]):
        keys = keys * radix + flat[:, col]
    return keys


def commutator_hist_numpy(X, Xinv, Y, Yinv, data, radix, dense_dist, max_len) -> np.ndarray:
    """Histogram of dense_dist[key([x,y])] over all |X| x |Y| pairs."""
    hist = np.zeros(max_len + 1, dtype=np.int64)
    chunk = max(1, 4_000_000 // max(1, Y.shape[0]))
    for lo in range(0, X.shape[0], chunk):
        hi = min(lo + chunk, X.shape[0])
        xy = expand_products_numpy(X[lo:hi], Y, data)
        n = hi - lo
        xi = np.repeat(np.arange(lo, hi), Y.shape[0])
        yi = np.tile(np.arange(Y.shape[0]), n)
        z = matmul_batch_numpy(matmul_batch_numpy(xy, Xinv[xi], data), Yinv[yi], data)
        dists = dense_dist[pack_keys_numpy(z, radix)]
        hist += np.bincount(dists, minlength=max_len + 1)[: max_len + 1]
    return hist


def commutator_hist_pairs_numpy(Xp, Xpinv, Yp, Ypinv, data, radix, dense_dist, max_len):
    """Same histogram over explicitly paired rows (sampling path)."""
    hist = np.zeros(max_len + 1, dtype=np.int64)
    chunk = 1_000_000
    for lo in range(0, Xp.shape[0], chunk):
        hi = min(lo + chunk, Xp.shape[0])
        z = matmul_batch_numpy(Xp[lo:hi], Yp[lo:hi], data)
        z = matmul_batch_numpy(z, Xpinv[lo:hi], data)
        z = matmul_batch_numpy(z, Ypinv[lo:hi], data)
        dists = dense_dist[pack_keys_numpy(z, radix)]
        hist += np.bincount(dists, minlength=max_len + 1)[: max_len + 1]
    return hist


# -- numba versions ---------------------------------------------------------

if numba is not None:
    _njit = numba.njit(cache=True)

    @_njit
    def _expand_zmod(frontier, gens, m):
        f, d = frontier.shape[0], frontier.shape[1]
        g = gens.shape[0]
        out = np.empty((f * g, d, d), dtype=np.int64)
        for a in range(f):
            for b in range(g):
                row = a * g + b
                for i in range(d):
                    for j in range(d):
                        acc = 0
                        for k in range(d):
                            acc += frontier[a, i, k] * gens[b, k, j]
                        out[row, i, j] = acc % m
        return out

    @_njit
    def _expand_table(frontier, gens, add_t, mul_t):
        f, d = frontier.shape[0], frontier.shape[1]
        g = gens.shape[0]
        out = np.empty((f * g, d, d), dtype=np.int64)
        for a in range(f):
            for b in range(g):
                row = a * g + b
                for i in range(d):
                    for j in range(d):
                        acc = mul_t[frontier[a, i, 0], gens[b, 0, j]]
                        for k in range(1, d):
                            acc = add_t[acc, mul_t[frontier[a, i, k], gens[b, k, j]]]
                        out[row, i, j] = acc
        return out

    @_njit
    def _matmul_batch_zmod(A, B, m):
        n, d = A.shape[0], A.shape[1]
        out = np.empty_like(A)
        for r in range(n):
            for i in range(d):
                for j in range(d):
                    acc = 0
                    for k in range(d):
                        acc += A[r, i, k] * B[r, k, j]
                    out[r, i, j] = acc % m
        return out

    @_njit
    def _matmul_batch_table(A, B, add_t, mul_t):
        n, d = A.shape[0], A.shape[1]
        out = np.empty_like(A)
        for r in range(n):
            for i in range(d):
                for j in range(d):
                    acc = mul_t[A[r, i, 0], B[r, 0, j]]
                    for k in range(1, d):
                        acc = add_t[acc, mul_t[A[r, i, k], B[r, k, j]]]
                    out[r, i, j] = acc
        return out

    @_njit
    def _pack_keys(mats, radix):
        n, d = mats.shape[0], mats.shape[1]
        keys = np.empty(n, dtype=np.int64)
        for r in range(n):
            acc = 0
            for i in range(d):
                for j in range(d):
                    acc = acc * radix + mats[r, i, j]
            keys[r] = acc
        return keys

    @_njit
    def _comm_hist_zmod(X, Xinv, Y, Yinv, m, radix, dense_dist, max_len):
        d = X.shape[1]
        hist = np.zeros(max_len + 1, dtype=np.int64)
        t1 = np.empty((d, d), dtype=np.int64)
        t2 = np.empty((d, d), dtype=np.int64)
        for a in range(X.shape[0]):
            for b in range(Y.shape[0]):
                for i in range(d):
                    for j in range(d):
                        acc = 0
                        for k in range(d):
                            acc += X[a, i, k] * Y[b, k, j]
                        t1[i, j] = acc % m
                for i in range(d):
                    for j in range(d):
                        acc = 0
                        for k in range(d):
                            acc += t1[i, k] * Xinv[a, k, j]
                        t2[i, j] = acc % m
                key = 0
                for i in range(d):
                    for j in range(d):
                        acc = 0
                        for k in range(d):
                            acc += t2[i, k] * Yinv[b, k, j]
                        key = key * radix + acc % m
                hist[dense_dist[key]] += 1
        return hist

    @_njit
    def _comm_hist_pairs_zmod(Xp, Xpinv, Yp, Ypinv, m, radix, dense_dist, max_len):
        d = Xp.shape[1]
        hist = np.zeros(max_len + 1, dtype=np.int64)
        t1 = np.empty((d, d), dtype=np.int64)
        t2 = np.empty((d, d), dtype=np.int64)
        for r in range(Xp.shape[0]):
            for i in range(d):
                for j in range(d):
                    acc = 0
                    for k in range(d):
                        acc += Xp[r, i, k] * Yp[r, k, j]
                    t1[i, j] = acc % m
            for i in range(d):
                for j in range(d):
                    acc = 0
                    for k in range(d):
                        acc += t1[i, k] * Xpinv[r, k, j]
                    t2[i, j] = acc % m
            key = 0
            for i in range(d):
                for j in range(d):
                    acc = 0
                    for k in range(d):
                        acc += t2[i, k] * Ypinv[r, k, j]
                    key = key * radix + acc % m
            hist[dense_dist[key]] += 1
        return hist


# -- dispatchers ------------------------------------------------------------


def expand_products(frontier: np.ndarray, gens: np.ndarray, data) -> np.ndarray:
    m, add_t, mul_t = data
    if BACKEND == "numba":
        if m:
            return _expand_zmod(frontier, gens, m)
        return _expand_table(frontier, gens, add_t, mul_t)
    return expand_products_numpy(frontier, gens, data)


def matmul_batch(A: np.ndarray, B: np.ndarray, data) -> np.ndarray:
    m, add_t, mul_t = data
    if BACKEND == "numba":
        if m:
            return _matmul_batch_zmod(A, B, m)
        return _matmul_batch_table(A, B, add_t, mul_t)
    return matmul_batch_numpy(A, B, data)


def pack_keys(mats: np.ndarray, radix: int) -> np.ndarray:
    if BACKEND == "numba":
        return _pack_keys(mats, radix)
    return pack_keys_numpy(mats, radix)


def commutator_hist(X, Xinv, Y, Yinv, data, radix, dense_dist, max_len) -> np.ndarray:
    m = data[0]
    if BACKEND == "numba" and m:
        return _comm_hist_zmod(X, Xinv, Y, Yinv, m, radix, dense_dist, max_len)
    return commutator_hist_numpy(X, Xinv, Y, Yinv, data, radix, dense_dist, max_len)


def commutator_hist_pairs(Xp, Xpinv, Yp, Ypinv, data, radix, dense_dist, max_len) -> np.ndarray:
    m = data[0]
    if BACKEND == "numba" and m:
        return _comm_hist_pairs_zmod(Xp, Xpinv, Yp, Ypinv, m, radix, dense_dist, max_len)
    return commutator_hist_pairs_numpy(Xp, Xpinv, Yp, Ypinv, data, radix, dense_dist, max_len)
