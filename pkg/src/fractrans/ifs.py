"""IFS containers, truncated coding maps and attractor rasters.

Occupancy rasters are indexed ``[iy, ix]`` with ``iy`` increasing with the
y coordinate (mathematical orientation). :func:`occupancy_to_png` flips
them for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from PIL import Image

from . import _kernels
from .errors import DegenerateDenominator
from .geometry import MapVariant, Point2
from .parallel import map_rows
from .rng import check_probabilities, derive_seed, symbol_stream
from .tolerances import TOL

BURN_IN = 100
_CHUNK = 1 << 22


@dataclass(frozen=True)
class Rect:
    x0: float = 0.0
    x1: float = 1.0
    y0: float = 0.0
    y1: float = 1.0

    def __post_init__(self):
        if not (self.x1 >= self.x0 and self.y1 >= self.y0):
            raise ValueError(f"malformed rectangle {self}")
        if self.x1 == self.x0 and self.y1 == self.y0:
            raise ValueError("domain rectangle is a single point")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def diam(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> Point2:
        return Point2(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def normalize(self, x, y):
        """Map domain coordinates to [0, 1]^2 (degenerate sides map to 0)."""
        u = (x - self.x0) / self.width if self.width > 0 else np.zeros_like(x)
        v = (y - self.y0) / self.height if self.height > 0 else np.zeros_like(y)
        return u, v

    def denormalize(self, u, v):
        return self.x0 + u * self.width, self.y0 + v * self.height

    def contains(self, x, y, tol: float = 0.0):
        return (x >= self.x0 - tol) & (x <= self.x1 + tol) & (y >= self.y0 - tol) & (y <= self.y1 + tol)

    def clamp(self, x, y):
        return np.clip(x, self.x0, self.x1), np.clip(y, self.y0, self.y1)

    def grid(self, n: int):
        """``n`` x ``n`` cell-centre sample points (one row if degenerate)."""
        u = (np.arange(n) + 0.5) / n
        v = u if self.height > 0 else np.zeros(1)
        uu, vv = np.meshgrid(u if self.width > 0 else np.zeros(1), v)
        return self.denormalize(uu.ravel(), vv.ravel())


UNIT_SQUARE = Rect()
UNIT_INTERVAL = Rect(0.0, 1.0, 0.0, 0.0)


@dataclass(frozen=True)
class IfsSystem:
    maps: tuple
    domain: Rect = UNIT_SQUARE
    lipschitz_bound: float = 0.5
    check_domain: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if len(self.maps) < 2:
            raise ValueError("an IFS needs at least two maps")
        if not 0.0 < self.lipschitz_bound < 1.0:
            raise ValueError("lipschitz_bound must lie in (0, 1)")
        if self.check_domain:
            gx, gy = self.domain.grid(32)
            for i, m in enumerate(self.maps, start=1):
                x, y = m.forward(gx, gy)
                if not np.all(self.domain.contains(x, y, 1e-9)):
                    raise ValueError(f"map {i} does not send the domain into itself")

    @property
    def n(self) -> int:
        return len(self.maps)

    @property
    def diam(self) -> float:
        return self.domain.diam

    def packed(self):
        kinds = np.empty(self.n, dtype=np.int64)
        coefs = np.empty((self.n, 9), dtype=np.float64)
        for i, m in enumerate(self.maps):
            kinds[i], coefs[i] = m.packed()
        return kinds, coefs

    def forward_by_symbol(self, symbols, x, y, strict: bool = True):
        """Apply map ``symbols[k]`` (1-based) to point k."""
        out_x = np.empty_like(x, dtype=np.float64)
        out_y = np.empty_like(y, dtype=np.float64)
        for i, m in enumerate(self.maps, start=1):
            sel = symbols == i
            if np.any(sel):
                out_x[sel], out_y[sel] = m.forward(x[sel], y[sel], strict=strict)
        return out_x, out_y

    def inverse_by_symbol(self, symbols, x, y, strict: bool = True):
        out_x = np.full_like(x, np.nan, dtype=np.float64)
        out_y = np.full_like(y, np.nan, dtype=np.float64)
        for i, m in enumerate(self.maps, start=1):
            sel = symbols == i
            if np.any(sel):
                out_x[sel], out_y[sel] = m.inverse(x[sel], y[sel], strict=strict)
        return out_x, out_y


@dataclass(frozen=True)
class Address:
    """A finite word over {1..N}, the depth-K truncation of an infinite address."""

    symbols: tuple = ()

    def __post_init__(self):
        syms = tuple(int(s) for s in self.symbols)
        if any(s < 1 for s in syms):
            raise ValueError("address symbols are 1-based")
        object.__setattr__(self, "symbols", syms)

    @classmethod
    def parse(cls, text: str) -> "Address":
        """"1342" (one digit per symbol) or "1, 3, 12" (separated)."""
        parts = text.replace(",", " ").split()
        if len(parts) == 1:
            parts = list(parts[0])
        return cls(tuple(int(c) for c in parts))

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, item):
        return self.symbols[item]

    def __str__(self) -> str:
        sep = "" if all(s < 10 for s in self.symbols) else ","
        return sep.join(map(str, self.symbols))

    @property
    def length(self) -> int:
        return len(self.symbols)

    def check(self, n: int) -> None:
        if any(s > n for s in self.symbols):
            raise ValueError(f"address uses a symbol outside 1..{n}")


def coding_points(ifs: IfsSystem, symbols: np.ndarray, seed_point=None):
    """Vectorised depth-K coding map: row m of ``symbols`` is one address.

    Returns f_{s1} o ... o f_{sK}(seed) for every row.
    """
    symbols = np.atleast_2d(np.asarray(symbols))
    seed_point = ifs.domain.center if seed_point is None else seed_point
    m = symbols.shape[0]
    x = np.full(m, float(seed_point[0]))
    y = np.full(m, float(seed_point[1]))
    for col in range(symbols.shape[1] - 1, -1, -1):
        x, y = ifs.forward_by_symbol(symbols[:, col], x, y)
    return x, y


def coding_point(ifs: IfsSystem, addr: Address | Sequence[int], seed_point=None) -> Point2:
    """f_{s1} o f_{s2} o ... o f_{sK}(seed_point).

    Within ``lipschitz_bound**K * diam`` of the true coding-map value.
    """
    addr = addr if isinstance(addr, Address) else Address(tuple(addr))
    if len(addr) == 0:
        raise ValueError("coding_point needs a nonempty address")
    addr.check(ifs.n)
    p = ifs.domain.center if seed_point is None else seed_point
    x, y = float(p[0]), float(p[1])
    for s in reversed(addr.symbols):
        x, y = ifs.maps[s - 1].forward(x, y)
        x, y = float(x), float(y)
    return Point2(x, y)


def truncation_error(ifs: IfsSystem, depth: int) -> float:
    return ifs.lipschitz_bound**depth * ifs.diam


def recommended_depth(ifs: IfsSystem, epsilon: float) -> int:
    """Smallest K with lipschitz_bound**K * diam <= epsilon."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    k = 0
    while truncation_error(ifs, k) > epsilon:
        k += 1
    return k


# -- rasters ---------------------------------------------------------------


def cell_indices(rect: Rect, x, y, resolution: int, tol: float = 1e-9):
    """Cell of each point under floor(coord * resolution), 1.0 clamped to the
    last cell. ``inside`` flags points within ``tol`` of the rectangle."""
    u, v = rect.normalize(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    with np.errstate(invalid="ignore"):
        inside = (u >= -tol) & (u <= 1 + tol) & (v >= -tol) & (v <= 1 + tol)
    inside &= np.isfinite(u) & np.isfinite(v)
    u = np.where(inside, u, 0.0)
    v = np.where(inside, v, 0.0)
    ix = np.clip(np.floor(u * resolution).astype(np.int64), 0, resolution - 1)
    iy = np.clip(np.floor(v * resolution).astype(np.int64), 0, resolution - 1)
    return ix, iy, inside


def cell_centers(rect: Rect, ix, iy, resolution: int):
    u = (np.asarray(ix) + 0.5) / resolution if rect.width > 0 else np.zeros(np.shape(ix))
    v = (np.asarray(iy) + 0.5) / resolution if rect.height > 0 else np.zeros(np.shape(iy))
    return rect.denormalize(u, v)


def domain_raster(rect: Rect, resolution: int) -> np.ndarray:
    occ = np.zeros((resolution, resolution), dtype=bool)
    if rect.width > 0 and rect.height > 0:
        occ[:] = True
    elif rect.width > 0:
        occ[0, :] = True
    else:
        occ[:, 0] = True
    return occ


def attractor_step(ifs: IfsSystem, occ: np.ndarray) -> np.ndarray:
    """One round of set iteration on the pixel grid: every occupied cell
    centre is pushed through every map and re-rasterised."""
    res = occ.shape[0]
    iy, ix = np.nonzero(occ)
    new = np.zeros_like(occ)
    for start in range(0, ix.size, _CHUNK):
        cx, cy = cell_centers(ifs.domain, ix[start:start + _CHUNK], iy[start:start + _CHUNK], res)
        for m in ifs.maps:
            x, y = m.forward(cx, cy, strict=False)
            jx, jy, ok = cell_indices(ifs.domain, x, y, res)
            new[jy[ok], jx[ok]] = True
    return new


def attractor_deterministic(ifs: IfsSystem, iterations: int, resolution: int) -> np.ndarray:
    """Boolean raster of F^k(domain), k = ``iterations``."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    occ = domain_raster(ifs.domain, resolution)
    for _ in range(iterations):
        occ = attractor_step(ifs, occ)
    return occ


def chaos_orbit(ifs: IfsSystem, symbols: np.ndarray, start=None):
    """Orbit x_k = f_{s_k}(x_{k-1}) for zero-based ``symbols``; returns xs, ys."""
    kinds, coefs = ifs.packed()
    start = ifs.domain.center if start is None else start
    xs, ys, fail = _kernels.orbit(
        kinds, coefs, np.ascontiguousarray(symbols), float(start[0]), float(start[1]), TOL.denominator
    )
    if fail >= 0:
        raise DegenerateDenominator(f"chaos-game orbit hit a projective pole at step {fail + 1}")
    return xs, ys


def _chaos_counts(ifs, probs, n, seed, resolution, burn_in):
    symbols = symbol_stream(probs, n + burn_in, seed)
    xs, ys = chaos_orbit(ifs, symbols)
    ix, iy, ok = cell_indices(ifs.domain, xs[burn_in:], ys[burn_in:], resolution)
    counts = np.zeros(resolution * resolution, dtype=np.int64)
    np.add.at(counts, (iy[ok] * resolution + ix[ok]), 1)
    return counts.reshape(resolution, resolution)


def attractor_chaos_game(
    ifs: IfsSystem,
    probs: Iterable[float],
    n: int,
    seed: int,
    resolution: int,
    orbits: int = 1,
    threads: int | None = None,
    burn_in: int = BURN_IN,
) -> np.ndarray:
    """Visit-count raster of ``n`` post-burn-in chaos-game points.

    With ``orbits > 1`` the points are split over independent orbits seeded
    ``seed ^ j``, whose counts are summed; the result does not depend on
    ``threads``.
    """
    p = check_probabilities(probs, ifs.n)
    if n < 1:
        raise ValueError("n must be >= 1")
    sizes = [n // orbits + (1 if j < n % orbits else 0) for j in range(orbits)]
    jobs = [(derive_seed(seed, j), size) for j, size in enumerate(sizes) if size > 0]

    def run(lo, hi):
        return [_chaos_counts(ifs, p, size, s, resolution, burn_in) for s, size in jobs[lo:hi]]

    parts = map_rows(run, len(jobs), threads) if len(jobs) > 1 else [run(0, 1)]
    total = np.zeros((resolution, resolution), dtype=np.int64)
    for chunk in parts:
        for counts in chunk:
            total += counts
    return total


def occupancy_to_image(raster: np.ndarray) -> Image.Image:
    """8-bit grayscale image of an occupancy/count raster, y axis up."""
    data = np.asarray(raster)
    if data.dtype == bool:
        gray = np.where(data, 255, 0).astype(np.uint8)
    else:
        top = data.max() if data.size else 0
        gray = (np.zeros_like(data) if top == 0 else data * 255 // top).astype(np.uint8)
    return Image.fromarray(np.flipud(gray), mode="L")


def occupancy_to_png(raster: np.ndarray, path) -> None:
    occupancy_to_image(raster).save(path, format="PNG")
