"""Fractal transformations between IFS attractors.

``T_FG = pi_G o tau_F``: a point is coded by the masked address under F and
the address is evaluated with G's maps. Pictures are moved with
nearest-neighbour sampling only; interpolation would smear the
non-smooth structure these maps produce.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoIntersection
from .geometry import AffineMap2, Point2
from .ifs import (
    UNIT_INTERVAL,
    UNIT_SQUARE,
    IfsSystem,
    Rect,
    attractor_deterministic,
    coding_points,
    recommended_depth,
)
from .parallel import map_rows
from .sections import Mask, masked_orbit, quadrant_mask, threshold_mask_1d, validate_mask

DEFAULT_EPSILON = 1.0 / 1024


@dataclass(frozen=True)
class SectionSystem:
    """An IFS with a mask: enough to compute masked addresses."""

    ifs: IfsSystem
    mask: Mask
    depth: int | None = None
    validate: bool = field(default=True, compare=False)
    # tops masks built from images of a bounding box only approximate f_i(A)
    check_subset: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.mask.n != self.ifs.n:
            raise ValueError("mask and IFS disagree on N")
        if self.depth is None:
            object.__setattr__(self, "depth", recommended_depth(self.ifs, DEFAULT_EPSILON))
        if self.validate:
            validate_mask(self.ifs, self.mask, check_subset=self.check_subset)


@dataclass(frozen=True)
class FractalTransform:
    source: SectionSystem
    target: IfsSystem
    depth: int | None = None

    def __post_init__(self):
        if self.source.ifs.n != self.target.n:
            raise ValueError("source and target must share the index set")
        if self.depth is None:
            object.__setattr__(
                self,
                "depth",
                max(self.source.depth, recommended_depth(self.target, DEFAULT_EPSILON)),
            )

    @property
    def n(self) -> int:
        return self.target.n

    def with_depth(self, depth: int) -> "FractalTransform":
        return FractalTransform(self.source, self.target, depth)


@dataclass(frozen=True)
class HomeoPair:
    forward: FractalTransform
    backward: FractalTransform

    def __post_init__(self):
        if self.forward.source.ifs != self.backward.target or self.backward.source.ifs != self.forward.target:
            raise ValueError("forward and backward transforms do not mirror each other")
        depth = max(self.forward.depth, self.backward.depth)
        object.__setattr__(self, "forward", self.forward.with_depth(depth))
        object.__setattr__(self, "backward", self.backward.with_depth(depth))

    @property
    def depth(self) -> int:
        return self.forward.depth

    def reversed(self) -> "HomeoPair":
        return HomeoPair(self.backward, self.forward)


def make_pair(f: SectionSystem, g: SectionSystem, depth: int | None = None) -> HomeoPair:
    return HomeoPair(FractalTransform(f, g.ifs, depth), FractalTransform(g, f.ifs, depth))


def transform_points(t: FractalTransform, x, y, strict: bool = True):
    """Vectorised transform; returns ``(x', y', valid)``."""
    src = t.source
    symbols, _, _, valid = masked_orbit(src.ifs, src.mask, x, y, t.depth, strict=strict)
    flat = symbols.reshape(-1, t.depth)
    ok = valid.reshape(-1)
    # invalid rows carry zero symbols; give them a harmless word
    flat = np.where(ok[:, None], flat, 1)
    tx, ty = coding_points(t.target, flat, t.target.domain.center)
    shape = np.shape(valid)
    return tx.reshape(shape), ty.reshape(shape), valid


def transform_point(t: FractalTransform, p) -> Point2:
    x, y, _ = transform_points(t, [p[0]], [p[1]])
    return Point2(float(x[0]), float(y[0]))


# -- pictures ----------------------------------------------------------------


def transform_raster(pull: FractalTransform, src, out_resolution: int, threads: int | None = None):
    """Resample ``src`` through ``pull``: output pixel y takes the colour of
    ``src`` at ``pull(y)``.

    To move a picture forward along T_FG, pass the backward transform T_GF.
    Pixels whose preimage cannot be computed stay transparent.
    """
    from .imaging import Picture, pixel_centers, sample_nearest

    out = np.zeros((out_resolution, out_resolution, 4), dtype=np.uint8)
    tgt_rect = pull.source.ifs.domain
    src_rect = pull.target.domain

    def rows(r0, r1):
        x, y = pixel_centers(out_resolution, out_resolution, tgt_rect, rows=(r0, r1))
        sx, sy, ok = transform_points(pull, x, y, strict=False)
        block = np.zeros((r1 - r0, out_resolution, 4), dtype=np.uint8)
        block[ok] = sample_nearest(src, sx[ok], sy[ok], src_rect)
        return block

    for (r0, r1), block in zip(_chunks(out_resolution), map_rows(rows, out_resolution, threads)):
        out[r0:r1] = block
    return Picture(out)


def _chunks(n):
    from .parallel import row_chunks

    return row_chunks(n)


def splat_raster(push: FractalTransform, src, out_resolution: int, supersample: int = 4, threads: int | None = None):
    """Forward splatting: every supersampled source pixel writes its colour
    at ``push(x)``; holes are filled once by a 3x3 majority vote."""
    from .imaging import fill_holes, splat

    canvas, written = splat(push, src, out_resolution, supersample, threads)
    return fill_holes(canvas, written)


# -- the H_{r,s} family and p* -------------------------------------------------


def hrs_system(r: float, s: float) -> IfsSystem:
    """Four affine maps with x- and y-scalings drawn from {r, s}:

    h1 = (r x, r y), h2 = (s x + 1 - s, r y),
    h3 = (s x + 1 - s, s y + 1 - s), h4 = (r x, s y + 1 - s).
    """
    if not (0 < r < 1 and 0 < s < 1):
        raise ValueError("r and s must lie in (0, 1)")
    if r + s < 1:
        raise ValueError("r + s < 1: the attractor is not the unit square")
    return IfsSystem(
        (
            AffineMap2(r, 0, 0, r, 0, 0),
            AffineMap2(s, 0, 0, r, 1 - s, 0),
            AffineMap2(s, 0, 0, s, 1 - s, 1 - s),
            AffineMap2(r, 0, 0, s, 0, 1 - s),
        ),
        UNIT_SQUARE,
        max(r, s),
    )


def hp_system(p: float) -> IfsSystem:
    """The non-overlapping grid system with split at p (r = p, s = 1 - p)."""
    return hrs_system(p, 1 - p)


def _admissible_threshold(r: float, s: float, t: float) -> float:
    """Clamp a split threshold into [1 - s, r], the overlap of the tiles."""
    return min(max(t, 1 - s), r)


def make_hrs_pair(r1: float, s1: float, r2: float, s2: float, p: float, depth: int | None = None) -> HomeoPair:
    """F = H_{r1,s1} masked at p, G = H_{r2,s2} masked at 1 - p.

    When a system does not overlap (r + s = 1) its only admissible split is
    r, and that is what gets used.
    """
    for v in (r1, s1, r2, s2):
        if not 0 < v < 1:
            raise ValueError("r and s must lie in (0, 1)")
    lo, hi = 1 - s1, r1
    if not lo - 1e-12 <= p <= hi + 1e-12:
        raise ValueError(f"threshold {p} outside the admissible range [{lo}, {hi}]")
    p_f = _admissible_threshold(r1, s1, p)
    p_g = _admissible_threshold(r2, s2, 1 - p)
    f = SectionSystem(hrs_system(r1, s1), quadrant_mask(p_f))
    g = SectionSystem(hrs_system(r2, s2), quadrant_mask(p_g))
    return make_pair(f, g, depth)


def interval_pair(a: float, b: float, p: float, depth: int | None = None) -> HomeoPair:
    """1-D pair F = (a x, b x + 1 - b) masked at p, G = (b x, a x + 1 - a)
    masked at 1 - p."""
    f_ifs = IfsSystem((AffineMap2(a, 0, 0, 1), AffineMap2(b, 0, 0, 1, 1 - b, 0)), UNIT_INTERVAL, a)
    g_ifs = IfsSystem((AffineMap2(b, 0, 0, 1), AffineMap2(a, 0, 0, 1, 1 - a, 0)), UNIT_INTERVAL, a)
    return make_pair(SectionSystem(f_ifs, threshold_mask_1d(p)), SectionSystem(g_ifs, threshold_mask_1d(1 - p)), depth)


def repeller_ifs(a: float, b: float) -> IfsSystem:
    """((a x, b y), (b x + 1 - b, a y + 1 - a)) on the unit square."""
    return IfsSystem(
        (AffineMap2(a, 0, 0, b, 0, 0), AffineMap2(b, 0, 0, a, 1 - b, 1 - a)),
        UNIT_SQUARE,
        a,
    )


def anti_diagonal_scan(raster: np.ndarray, lo: float, hi: float) -> float:
    """Largest x in [lo, hi] with (x, 1 - x) in an occupied cell.

    A cell (ix, iy) meets the line x + y = 1 when ix + iy is within
    [res - 2, res]; the largest x of the line inside that closed cell is
    min(ix + 1, res - iy) / res.
    """
    res = raster.shape[0]
    iy, ix = np.nonzero(raster)
    s = ix + iy
    on_line = (s >= res - 2) & (s <= res)
    x_max = np.minimum(ix + 1, res - iy) / res
    x_min = np.maximum(ix, res - iy - 1) / res
    hit = on_line & (x_max >= lo) & (x_min <= hi)
    if not np.any(hit):
        raise NoIntersection("the attractor raster does not meet the line x + y = 1 in range")
    return float(min(hi, max(lo, x_max[hit].max())))


def compute_p_star(a: float, b: float, resolution: int = 4096, iterations: int = 40) -> float:
    """The split point making the overlapping pair a homeomorphism.

    Rasterises the attractor of ((a x, b y), (b x + 1 - b, a y + 1 - a)) and
    returns the largest x in [1 - b, a] at which it meets y = 1 - x.
    """
    if not (a >= b > 0 and a + b >= 1 and a < 1):
        raise ValueError("need a >= b > 0, a + b >= 1 and a < 1")
    raster = attractor_deterministic(repeller_ifs(a, b), iterations, resolution)
    return anti_diagonal_scan(raster, 1 - b, a)
