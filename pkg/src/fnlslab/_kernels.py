"""Pair-sum quadrature kernels for the nonlocal double sums.

The hot path is a brute-force double sum over grid-point pairs with
minimum-image periodic distance. Kernels are JIT-compiled with numba by
default; setting the environment variable FNLSLAB_NO_NUMBA=1 before import
selects a pure-numpy chunked fallback with identical semantics.
"""

from __future__ import annotations

import os

import numpy as np

USING_NUMBA = os.environ.get("FNLSLAB_NO_NUMBA", "0") not in ("1", "true", "yes")

if USING_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dependency
        USING_NUMBA = False


def _pair_sum_1d_py(u, idx1, idx2, m, h, power):
    """sum over (i,j) in idx1 x idx2, i != j, of (u_i-u_j)^2 / d_ij^power."""
    half = m // 2
    # wrapped lattice distances take only half+1 values; tabulating d^power
    # replaces a pow per pair with a lookup
    dpow = np.empty(half + 1)
    dpow[0] = 1.0    # never hit, the i == j pairs are skipped
    for k in range(1, half + 1):
        dpow[k] = (k * h) ** power
    total = 0.0
    for a in range(idx1.shape[0]):
        i = idx1[a]
        ui = u[i]
        for b in range(idx2.shape[0]):
            j = idx2[b]
            if i == j:
                continue
            k = i - j
            if k < 0:
                k = -k
            if k > half:
                k = m - k
            diff = ui - u[j]
            total += diff * diff / dpow[k]
    return total


def _pair_sum_2d_py(u, idx1, idx2, m, h, span, power):
    """Flat-index variant for N=2; span = 2L for minimum image."""
    half = m // 2
    dpow = np.empty((half + 1, half + 1))
    for k0 in range(half + 1):
        for k1 in range(half + 1):
            d2 = (k0 * h) ** 2 + (k1 * h) ** 2
            dpow[k0, k1] = d2 ** (0.5 * power) if d2 > 0.0 else 1.0
    n2 = idx2.shape[0]
    j0s = np.empty(n2, np.int64)
    j1s = np.empty(n2, np.int64)
    for b in range(n2):
        fj = idx2[b]
        j0s[b] = fj // m
        j1s[b] = fj - j0s[b] * m
    total = 0.0
    for a in range(idx1.shape[0]):
        fi = idx1[a]
        i0 = fi // m
        i1 = fi - i0 * m
        ui = u[fi]
        for b in range(n2):
            if fi == idx2[b]:
                continue
            k0 = i0 - j0s[b]
            if k0 < 0:
                k0 = -k0
            if k0 > half:
                k0 = m - k0
            k1 = i1 - j1s[b]
            if k1 < 0:
                k1 = -k1
            if k1 > half:
                k1 = m - k1
            diff = ui - u[idx2[b]]
            total += diff * diff / dpow[k0, k1]
    return total


def _pair_sum_1d_numpy(u, idx1, idx2, m, h, power):
    total = 0.0
    half = m // 2
    u2 = u[idx2]
    chunk = max(1, (1 << 22) // max(1, idx2.shape[0]))
    for start in range(0, idx1.shape[0], chunk):
        i = idx1[start:start + chunk]
        k = np.abs(i[:, None] - idx2[None, :])
        k = np.where(k > half, m - k, k)
        diff = u[i][:, None] - u2[None, :]
        d = k * h
        with np.errstate(divide="ignore", invalid="ignore"):
            contrib = diff * diff / d ** power
        contrib[k == 0] = 0.0
        total += float(contrib.sum())
    return total


def _pair_sum_2d_numpy(u, idx1, idx2, m, h, span, power):
    total = 0.0
    i20 = idx2 // m
    i21 = idx2 - i20 * m
    u2 = u[idx2]
    chunk = max(1, (1 << 22) // max(1, idx2.shape[0]))
    for start in range(0, idx1.shape[0], chunk):
        sel = idx1[start:start + chunk]
        i10 = sel // m
        i11 = sel - i10 * m
        d0 = (i10[:, None] - i20[None, :]) * h
        d0 -= span * np.round(d0 / span)
        d1 = (i11[:, None] - i21[None, :]) * h
        d1 -= span * np.round(d1 / span)
        d2 = d0 * d0 + d1 * d1
        diff = u[sel][:, None] - u2[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            contrib = diff * diff / d2 ** (0.5 * power)
        contrib[d2 == 0.0] = 0.0
        total += float(contrib.sum())
    return total


def _weighted_tail_sum_py(absu, idx, coords, x0, span, power):
    """sum over idx of |u| / |x - x0|^power with minimum image, N-d coords."""
    total = 0.0
    n = coords.shape[0]
    for a in range(idx.shape[0]):
        fi = idx[a]
        d2 = 0.0
        for c in range(n):
            d = coords[c, fi] - x0[c]
            d -= span * np.round(d / span)
            d2 += d * d
        if d2 > 0.0:
            total += absu[fi] / d2 ** (0.5 * power)
    return total


def _weighted_tail_sum_numpy(absu, idx, coords, x0, span, power):
    d2 = np.zeros(idx.shape[0])
    for c in range(coords.shape[0]):
        d = coords[c, idx] - x0[c]
        d -= span * np.round(d / span)
        d2 += d * d
    out = np.zeros_like(d2)
    nz = d2 > 0
    out[nz] = absu[idx][nz] / d2[nz] ** (0.5 * power)
    return float(out.sum())


if USING_NUMBA:
    pair_sum_1d = njit(cache=True)(_pair_sum_1d_py)
    pair_sum_2d = njit(cache=True)(_pair_sum_2d_py)
    weighted_tail_sum = njit(cache=True)(_weighted_tail_sum_py)
else:
    pair_sum_1d = _pair_sum_1d_numpy
    pair_sum_2d = _pair_sum_2d_numpy
    weighted_tail_sum = _weighted_tail_sum_numpy
