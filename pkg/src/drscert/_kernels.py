"""Compiled inner loop for the fixed-point engine.

Cones are passed as three integer arrays (kind code, size parameter, start
offset). The projection here is an independent transcription of
``cones._proj_*``; the test suite checks the two agree.
"""

import math

import numpy as np
from numba import njit

from .cones import ConeSpec

KIND_CODES = {"nonneg": 0, "soc": 1, "rsoc": 2, "psd": 3, "zero": 4, "free": 5}

# verdict codes shared with operators.Verdict
CONVERGED, DIVERGING_LARGE, DIVERGING_SMALL, EXHAUSTED, BLOWUP = 0, 1, 2, 3, 4

_SQRT2 = math.sqrt(2.0)


def encode_cone(cone: ConeSpec):
    kinds = np.array([KIND_CODES[blk.kind] for blk in cone.blocks], dtype=np.int64)
    sizes = np.array([blk.size for blk in cone.blocks], dtype=np.int64)
    starts = np.array([sl.start for sl in cone.slices], dtype=np.int64)
    return kinds, sizes, starts


@njit(cache=True, nogil=True)
def _soc_inplace(x, out, lo, hi):
    t = x[hi - 1]
    nu = 0.0
    for i in range(lo, hi - 1):
        nu += x[i] * x[i]
    nu = math.sqrt(nu)
    if nu <= t:
        for i in range(lo, hi):
            out[i] = x[i]
    elif nu <= -t:
        for i in range(lo, hi):
            out[i] = 0.0
    else:
        alpha = 0.5 * (nu + t)
        s = alpha / nu
        for i in range(lo, hi - 1):
            out[i] = s * x[i]
        out[hi - 1] = alpha


@njit(cache=True, nogil=True)
def _psd_inplace(x, out, lo, side):
    M = np.empty((side, side))
    idx = lo
    amax = 0.0
    for j in range(side):
        for i in range(j + 1):
            v = x[idx] if i == j else x[idx] / _SQRT2
            M[i, j] = v
            M[j, i] = v
            idx += 1
    lam, Q = np.linalg.eigh(M)
    for i in range(side):
        a = abs(lam[i])
        if a > amax:
            amax = a
    if lam[0] >= -1e-12 * (1.0 + amax):
        for i in range(lo, idx):
            out[i] = x[i]
        return
    for i in range(side):
        if lam[i] < 0.0:
            lam[i] = 0.0
    idx = lo
    for j in range(side):
        for i in range(j + 1):
            acc = 0.0
            for r in range(side):
                acc += Q[i, r] * lam[r] * Q[j, r]
            out[idx] = acc if i == j else acc * _SQRT2
            idx += 1


@njit(cache=True, nogil=True)
def project_blocks(x, out, kinds, sizes, starts):
    for b in range(kinds.shape[0]):
        kind = kinds[b]
        lo = starts[b]
        size = sizes[b]
        if kind == 0:
            for i in range(lo, lo + size):
                out[i] = x[i] if x[i] > 0.0 else 0.0
        elif kind == 1:
            _soc_inplace(x, out, lo, lo + size)
        elif kind == 2:
            hi = lo + size
            y = x[lo:hi].copy()
            u = y[size - 2]
            w = y[size - 1]
            nx = 0.0
            for i in range(size - 2):
                nx += y[i] * y[i]
            if u >= 0.0 and w >= 0.0 and 2.0 * u * w >= nx:
                for i in range(lo, hi):
                    out[i] = x[i]
                continue
            y[size - 2] = (u - w) / _SQRT2
            y[size - 1] = (u + w) / _SQRT2
            p = np.empty(size)
            _soc_inplace(y, p, 0, size)
            a = p[size - 2]
            c = p[size - 1]
            p[size - 2] = (a + c) / _SQRT2
            p[size - 1] = (c - a) / _SQRT2
            for i in range(size):
                out[lo + i] = p[i]
        elif kind == 3:
            _psd_inplace(x, out, lo, size)
        elif kind == 4:
            for i in range(lo, lo + size):
                out[i] = 0.0
        else:
            for i in range(lo, lo + size):
                out[i] = x[i]


@njit(cache=True, nogil=True)
def _norm(v):
    acc = 0.0
    for i in range(v.shape[0]):
        acc += v[i] * v[i]
    return math.sqrt(acc)


@njit(cache=True, nogil=True)
def run_loop(
    z,
    basis,
    offset,
    kinds,
    sizes,
    starts,
    max_iters,
    window,
    stride,
    conv_tol,
    big_M,
    eps_residual,
    drift_tol,
):
    n = z.shape[0]
    r_dim = basis.shape[1]
    n_records = max_iters // stride + 1
    norm_trace = np.empty(n_records)
    minres_trace = np.empty(n_records)
    ring = np.empty((window, n))

    x_half = np.empty(n)
    x_next = np.empty(n)
    step = np.zeros(n)
    v_hat = np.zeros(n)
    coef = np.empty(r_dim)

    project_blocks(z, x_half, kinds, sizes, starts)
    x_next[:] = x_half
    min_res = math.inf
    drift = math.inf
    stall_run = 0
    stalled = False
    streak = 0
    verdict = EXHAUSTED
    norm_z = _norm(z)
    k = 0
    n_rec = 0

    while True:
        if k % stride == 0:
            norm_trace[n_rec] = norm_z
            minres_trace[n_rec] = min_res
            n_rec += 1
        if norm_z >= big_M and k > 0:
            verdict = DIVERGING_LARGE if min_res > eps_residual else DIVERGING_SMALL
            break
        if k >= max_iters:
            break

        project_blocks(z, x_half, kinds, sizes, starts)
        # x_next = D (2 x_half - z) + offset with D = I - basis basis^T
        for j in range(r_dim):
            acc = 0.0
            for i in range(n):
                acc += basis[i, j] * (2.0 * x_half[i] - z[i])
            coef[j] = acc
        res2 = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(r_dim):
                acc += basis[i, j] * coef[j]
            x_next[i] = 2.0 * x_half[i] - z[i] - acc + offset[i]
            step[i] = x_next[i] - x_half[i]
            res2 += step[i] * step[i]
        res_norm = math.sqrt(res2)
        for i in range(n):
            z[i] += step[i]
        k += 1

        if not math.isfinite(res_norm) or not math.isfinite(_norm(z)):
            verdict = BLOWUP
            break
        if res_norm < min_res:
            min_res = res_norm
            for i in range(n):
                v_hat[i] = -step[i]

        slot = k % window
        if k > window:
            d2 = 0.0
            for i in range(n):
                diff = x_half[i] - ring[slot, i]
                d2 += diff * diff
            drift = math.sqrt(d2)
            if drift <= drift_tol * (1.0 + _norm(x_half)):
                stall_run += 1
            else:
                stall_run = 0
            stalled = stall_run >= window
        for i in range(n):
            ring[slot, i] = x_half[i]

        if res_norm < conv_tol * (1.0 + norm_z):
            streak += 1
        else:
            streak = 0
        norm_z = _norm(z)
        if streak >= window:
            verdict = CONVERGED
            if k % stride == 0:
                norm_trace[n_rec] = norm_z
                minres_trace[n_rec] = min_res
                n_rec += 1
            break

    return (
        verdict,
        k,
        z,
        x_half,
        x_next,
        -step,
        v_hat,
        min_res,
        drift,
        stalled,
        norm_trace[:n_rec].copy(),
        minres_trace[:n_rec].copy(),
    )
