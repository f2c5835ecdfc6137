"""Hot inner-loop kernels with a numba path and a pure-numpy fallback.

Set ``QISDP_DISABLE_NUMBA=1`` before import to force the numpy path. Both
implementations stay importable as ``numpy_*`` / ``numba_*`` so benchmarks
and tests can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

NONE_SELECTED = -2
ZERO_SELECTED = -1


def numpy_rank2_update(W, i, n00, n01, n11):
    """In place ``W += Z @ N @ Z.T`` with ``Z = W[:, [0, i]]`` and symmetric 2x2 ``N``."""
    z0 = W[:, 0].copy()
    if i == 0:
        W += n00 * np.outer(z0, z0)
    else:
        zi = W[:, i].copy()
        u = n00 * z0 + n01 * zi
        v = n01 * z0 + n11 * zi
        W += np.outer(u, z0) + np.outer(v, zi)
    # Mirror the upper triangle, as the numba kernel does, to keep W exactly symmetric.
    lower = np.tril_indices(W.shape[0], -1)
    W[lower] = W.T[lower]


def numpy_select(W, sigma, lo, hi, offsets, y, active, tol):
    """Best eligible coordinate among the reduced candidate set.

    Returns ``(k, grad)`` where ``k`` is a flat facet index, ``ZERO_SELECTED``
    for y0 or ``NONE_SELECTED`` when nothing exceeds ``tol``.
    """
    n = lo.shape[0]
    w00 = W[0, 0]
    idx = np.arange(1, n + 1)
    w0 = W[0, 1:]
    wd = W[idx, idx]
    lof = lo.astype(np.float64)
    hif = hi.astype(np.float64)

    def lower_grad(j):
        jf = j.astype(np.float64)
        return 1.0 - sigma * ((1.0 - jf * (jf + 1.0)) * w00 + (2.0 * jf + 1.0) * w0 - wd)

    j_first = lo
    j_last = hi - 1
    j_star = np.ceil(w0 / w00 - 1.0).astype(np.int64)
    star_ok = (j_star >= lo) & (j_star <= hi - 1)
    j_star = np.where(star_ok, j_star, j_first)

    g_up = 1.0 - sigma * ((1.0 + lof * hif) * w00 - (lof + hif) * w0 + wd)
    base = offsets[:-1]
    keys = np.concatenate([base, base + (j_last - lo), base + (j_star - lo), base + (hi - lo)])
    grads = np.concatenate([lower_grad(j_first), lower_grad(j_last), lower_grad(j_star), g_up])

    if active.shape[0]:
        var = np.searchsorted(offsets, active, side="right")
        j = active - offsets[var - 1] + lo[var - 1]
        up = j == hi[var - 1]
        jf = j.astype(np.float64)
        a00 = np.where(up, 1.0 + lof[var - 1] * hif[var - 1], 1.0 - jf * (jf + 1.0))
        a0i2 = np.where(up, -(lof[var - 1] + hif[var - 1]), 2.0 * jf + 1.0)
        aii = np.where(up, 1.0, -1.0)
        g_act = 1.0 - sigma * (a00 * w00 + a0i2 * W[0, var] + aii * W[var, var])
        keys = np.concatenate([keys, active])
        grads = np.concatenate([grads, g_act])

    yk = y[keys]
    eligible = (grads < 0.0) | ((grads > 0.0) & (yk < 0.0))
    score = np.where(eligible, np.abs(grads), -1.0)

    g0 = 1.0 - sigma * w00
    best_k, best_g, best_abs = ZERO_SELECTED, g0, abs(g0)
    if score.shape[0]:
        top = score.max()
        if top > best_abs:
            pick = np.flatnonzero(score == top)
            j = pick[np.argmin(keys[pick])]
            best_k, best_g, best_abs = int(keys[j]), float(grads[j]), float(top)
    if best_abs <= tol:
        return NONE_SELECTED, 0.0
    return best_k, float(best_g)


def _numba_kernels():
    import numba

    @numba.njit(cache=True)
    def rank2_update(W, i, n00, n01, n11):
        d = W.shape[0]
        z0 = W[:, 0].copy()
        if i == 0:
            for r in range(d):
                a = n00 * z0[r]
                for c in range(r, d):
                    W[r, c] += a * z0[c]
            for r in range(d):
                for c in range(r):
                    W[r, c] = W[c, r]
            return
        zi = W[:, i].copy()
        for r in range(d):
            u = n00 * z0[r] + n01 * zi[r]
            v = n01 * z0[r] + n11 * zi[r]
            for c in range(r, d):
                W[r, c] += u * z0[c] + v * zi[c]
        for r in range(d):
            for c in range(r):
                W[r, c] = W[c, r]

    @numba.njit(cache=True)
    def _lower(sigma, j, w00, w0, wd):
        jf = float(j)
        return 1.0 - sigma * ((1.0 - jf * (jf + 1.0)) * w00 + (2.0 * jf + 1.0) * w0 - wd)

    @numba.njit(cache=True)
    def _consider(k, g, y, best_k, best_g, best_abs):
        if g < 0.0 or (g > 0.0 and y[k] < 0.0):
            a = abs(g)
            if a > best_abs or (a == best_abs and best_k >= 0 and k < best_k):
                return k, g, a
        return best_k, best_g, best_abs

    @numba.njit(cache=True)
    def select(W, sigma, lo, hi, offsets, y, active, tol):
        w00 = W[0, 0]
        best_g = 1.0 - sigma * w00
        best_k = -1
        best_abs = abs(best_g)
        n = lo.shape[0]
        for t in range(n):
            i = t + 1
            w0 = W[0, i]
            wd = W[i, i]
            l = lo[t]
            u = hi[t]
            base = offsets[t]
            g = _lower(sigma, l, w00, w0, wd)
            best_k, best_g, best_abs = _consider(base, g, y, best_k, best_g, best_abs)
            g = _lower(sigma, u - 1, w00, w0, wd)
            best_k, best_g, best_abs = _consider(base + u - 1 - l, g, y, best_k, best_g, best_abs)
            js = np.int64(np.ceil(w0 / w00 - 1.0))
            if js >= l and js <= u - 1:
                g = _lower(sigma, js, w00, w0, wd)
                best_k, best_g, best_abs = _consider(base + js - l, g, y, best_k, best_g, best_abs)
            g = 1.0 - sigma * ((1.0 + float(l) * float(u)) * w00 - float(l + u) * w0 + wd)
            best_k, best_g, best_abs = _consider(base + u - l, g, y, best_k, best_g, best_abs)
        for q in range(active.shape[0]):
            k = active[q]
            i = np.searchsorted(offsets, k, side="right")
            l = lo[i - 1]
            u = hi[i - 1]
            j = k - offsets[i - 1] + l
            if j == u:
                g = 1.0 - sigma * ((1.0 + float(l) * float(u)) * w00 - float(l + u) * W[0, i] + W[i, i])
            else:
                g = _lower(sigma, j, w00, W[0, i], W[i, i])
            best_k, best_g, best_abs = _consider(k, g, y, best_k, best_g, best_abs)
        if best_abs <= tol:
            return -2, 0.0
        return best_k, best_g

    return rank2_update, select


def _env_disabled() -> bool:
    return os.environ.get("QISDP_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


try:
    numba_rank2_update, numba_select = _numba_kernels()
    HAVE_NUMBA = True
except ImportError:
    numba_rank2_update = numba_select = None
    HAVE_NUMBA = False

if HAVE_NUMBA and not _env_disabled():
    BACKEND = "numba"
    rank2_update, select = numba_rank2_update, numba_select
else:
    BACKEND = "numpy"
    rank2_update, select = numpy_rank2_update, numpy_select


_warm = False


def warmup() -> None:
    """Trigger JIT compilation so that solver timings exclude it."""
    global _warm
    if _warm:
        return
    W = np.eye(3)
    lo = np.array([-1, -1], dtype=np.int64)
    hi = np.array([1, 1], dtype=np.int64)
    offsets = np.array([0, 3, 6], dtype=np.int64)
    select(W, 1.0, lo, hi, offsets, np.zeros(6), np.zeros(0, dtype=np.int64), 1e-7)
    rank2_update(W, 1, 0.0, 0.0, 0.0)
    rank2_update(W, 0, 0.0, 0.0, 0.0)
    _warm = True
