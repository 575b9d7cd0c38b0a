"""Reproducible random symbol streams.

The bit generator is PCG64 (O'Neill, "PCG: A Family of Simple Fast
Space-Efficient Statistically Good Algorithms for Random Number
Generation"), whose output stream for a given seed is fixed across
platforms and numpy versions. Doubles are formed from the raw 64-bit
words directly, top 53 bits, so no distribution code sits between the
generator and the symbols.
"""

from __future__ import annotations

import numpy as np

from .errors import BadProbabilities
from .tolerances import TOL

_CHUNK = 1 << 20


def check_probabilities(probs, n_maps: int | None = None) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise BadProbabilities("probabilities must be a non-empty vector")
    if n_maps is not None and p.size != n_maps:
        raise BadProbabilities(f"expected {n_maps} probabilities, got {p.size}")
    if np.any(~np.isfinite(p)) or np.any(p < 0):
        raise BadProbabilities("probabilities must be finite and nonnegative")
    if abs(p.sum() - 1.0) > TOL.probability:
        raise BadProbabilities(f"probabilities sum to {p.sum()!r}, not 1")
    return p


def derive_seed(seed: int, index: int) -> int:
    """Seed for the ``index``-th independent orbit (seed XOR index)."""
    return int(seed) ^ int(index)


def uniform_doubles(seed: int, n: int) -> np.ndarray:
    """``n`` doubles in [0, 1) from PCG64 seeded with ``seed``."""
    bitgen = np.random.PCG64(int(seed) & ((1 << 64) - 1))
    out = np.empty(n, dtype=np.float64)
    for start in range(0, n, _CHUNK):
        stop = min(n, start + _CHUNK)
        raw = bitgen.random_raw(stop - start)
        out[start:stop] = (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
    return out


def symbol_stream(probs, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. zero-based map indices drawn according to ``probs``."""
    p = check_probabilities(probs)
    cum = np.cumsum(p)
    cum[-1] = 1.0
    # zero-probability maps must never be drawn, including at u == cum[i]
    idx = np.searchsorted(cum, uniform_doubles(seed, n), side="right")
    np.minimum(idx, p.size - 1, out=idx)
    return idx.astype(np.uint8 if p.size < 256 else np.int32)
