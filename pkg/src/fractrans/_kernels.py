"""Sequential orbit kernels, compiled with numba when it is available."""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


@njit(cache=True, nogil=True)
def _apply_packed(kind, c, x, y, den_tol):
    if kind == 0:
        return c[0] * x + c[1] * y + c[4], c[2] * x + c[3] * y + c[5], True
    if kind == 1:
        w = c[6] * x + c[7] * y + c[8]
        if abs(w) <= den_tol:
            return x, y, False
        return (c[0] * x + c[1] * y + c[2]) / w, (c[3] * x + c[4] * y + c[5]) / w, True
    xy = x * y
    gx = c[4] + c[0] - c[2] - c[6]
    gy = c[5] + c[1] - c[3] - c[7]
    return (
        c[0] + x * (c[2] - c[0]) + y * (c[6] - c[0]) + xy * gx,
        c[1] + x * (c[3] - c[1]) + y * (c[7] - c[1]) + xy * gy,
        True,
    )


@njit(cache=True, nogil=True)
def orbit(kinds, coefs, symbols, x0, y0, den_tol):
    """Return the points x_k = f_{s_k}(x_{k-1}), k = 1..len(symbols).

    The third return value is the index of the first step hitting a
    projective pole, or -1.
    """
    n = symbols.shape[0]
    xs = np.empty(n, dtype=np.float64)
    ys = np.empty(n, dtype=np.float64)
    x = x0
    y = y0
    for k in range(n):
        s = symbols[k]
        x, y, ok = _apply_packed(kinds[s], coefs[s], x, y, den_tol)
        if not ok:
            return xs, ys, k
        xs[k] = x
        ys[k] = y
    return xs, ys, -1


@njit(cache=True, nogil=True)
def paint_last_wins(dst, dst_index, colors, src_index, visited):
    """dst[dst_index[k]] = colors[src_index[k]] in order; mark visited."""
    for k in range(dst_index.shape[0]):
        d = dst_index[k]
        if d < 0:
            continue
        s = src_index[k]
        for ch in range(dst.shape[1]):
            dst[d, ch] = colors[s, ch]
        visited[d] = True
