"""Masks, masked dynamical systems and the sections they define.

A mask assigns every attractor point to exactly one map index; the masked
dynamical system then sends ``x`` in region ``i`` to ``f_i^{-1}(x)``. The
symbols emitted along the orbit form the masked address of ``x``.

Region membership follows the closed-below/open-above convention: a
threshold split at ``p`` puts ``p`` itself in the lower cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from .errors import EmptyAddress, MaskGap, MaskNotSubset, MaskOverlap, OrbitEscape
from .geometry import BilinearMap2, Point2
from .ifs import Address, IfsSystem, attractor_deterministic, cell_indices, coding_points
from .tolerances import TOL

VALIDATION_GRID = 256
VALIDATION_ITERATIONS = 12

_SIDES = ("le", "lt", "ge", "gt")


def _compare(values, threshold, side):
    if side == "le":
        return values <= threshold
    if side == "lt":
        return values < threshold
    if side == "ge":
        return values >= threshold
    return values > threshold


# -- regions ---------------------------------------------------------------

_REGISTRY: dict[str, type] = {}


def _region(cls):
    _REGISTRY[cls.tag] = cls
    return cls


class Region:
    tag: ClassVar[str]

    def contains(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def __contains__(self, p) -> bool:
        return bool(self.contains(np.float64(p[0]), np.float64(p[1])))

    def to_dict(self) -> dict:
        raise NotImplementedError


@_region
@dataclass(frozen=True)
class HalfPlaneX(Region):
    """{x <= t}, {x < t}, {x >= t} or {x > t} depending on ``side``."""

    threshold: float
    side: str = "le"
    tag: ClassVar[str] = "halfplane_x"

    def __post_init__(self):
        if self.side not in _SIDES:
            raise ValueError(f"side must be one of {_SIDES}")

    def contains(self, x, y):
        return _compare(np.asarray(x), self.threshold, self.side)

    def to_dict(self):
        return {self.tag: {"threshold": self.threshold, "side": self.side}}


@_region
@dataclass(frozen=True)
class HalfPlaneY(Region):
    threshold: float
    side: str = "le"
    tag: ClassVar[str] = "halfplane_y"

    def __post_init__(self):
        if self.side not in _SIDES:
            raise ValueError(f"side must be one of {_SIDES}")

    def contains(self, x, y):
        return _compare(np.asarray(y), self.threshold, self.side)

    def to_dict(self):
        return {self.tag: {"threshold": self.threshold, "side": self.side}}


@_region
@dataclass(frozen=True)
class Rect2(Region):
    """Axis-aligned box with per-end open/closed flags."""

    x: tuple
    y: tuple
    x_closed: tuple = (True, True)
    y_closed: tuple = (True, True)
    tag: ClassVar[str] = "rect"

    def __post_init__(self):
        for name in ("x", "y"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        for name in ("x_closed", "y_closed"):
            object.__setattr__(self, name, tuple(bool(v) for v in getattr(self, name)))

    def contains(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        inside = _compare(x, self.x[0], "ge" if self.x_closed[0] else "gt")
        inside &= _compare(x, self.x[1], "le" if self.x_closed[1] else "lt")
        inside &= _compare(y, self.y[0], "ge" if self.y_closed[0] else "gt")
        inside &= _compare(y, self.y[1], "le" if self.y_closed[1] else "lt")
        return inside

    def to_dict(self):
        return {
            self.tag: {
                "x": list(self.x),
                "y": list(self.y),
                "x_closed": list(self.x_closed),
                "y_closed": list(self.y_closed),
            }
        }


@_region
@dataclass(frozen=True)
class QuadTile(Region):
    """The closed image quadrilateral of a bilinear map."""

    quad: BilinearMap2
    tag: ClassVar[str] = "quad"

    def contains(self, x, y):
        u, _ = self.quad.inverse(x, y, strict=False)
        return ~np.isnan(u)

    def to_dict(self):
        q = self.quad
        return {self.tag: [list(q.P), list(q.Q), list(q.R), list(q.S)]}


@_region
@dataclass(frozen=True)
class Diagonal(Region):
    """One side of the line x + y = 1."""

    side: str = "le"
    tag: ClassVar[str] = "diagonal"

    def __post_init__(self):
        if self.side not in _SIDES:
            raise ValueError(f"side must be one of {_SIDES}")

    def contains(self, x, y):
        return _compare(np.asarray(x) + np.asarray(y), 1.0, self.side)

    def to_dict(self):
        return {self.tag: {"side": self.side}}


@_region
@dataclass(frozen=True)
class Everywhere(Region):
    tag: ClassVar[str] = "everywhere"

    def contains(self, x, y):
        return np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape, dtype=bool)

    def to_dict(self):
        return {self.tag: True}


@_region
@dataclass(frozen=True)
class Complement(Region):
    inner: Region
    tag: ClassVar[str] = "not"

    def contains(self, x, y):
        return ~self.inner.contains(x, y)

    def to_dict(self):
        return {self.tag: self.inner.to_dict()}


@_region
@dataclass(frozen=True)
class Intersection(Region):
    parts: tuple
    tag: ClassVar[str] = "all"

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, x, y):
        out = Everywhere().contains(x, y)
        for r in self.parts:
            out = out & r.contains(x, y)
        return out

    def to_dict(self):
        return {self.tag: [r.to_dict() for r in self.parts]}


@_region
@dataclass(frozen=True)
class Union(Region):
    parts: tuple
    tag: ClassVar[str] = "any"

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, x, y):
        out = ~Everywhere().contains(x, y)
        for r in self.parts:
            out = out | r.contains(x, y)
        return out

    def to_dict(self):
        return {self.tag: [r.to_dict() for r in self.parts]}


def region_from_dict(doc) -> Region:
    """Inverse of ``Region.to_dict``; raises ``ValueError`` on unknown keys."""
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ValueError(f"a region is a single-key mapping, got {doc!r}")
    (tag, body), = doc.items()
    if tag not in _REGISTRY:
        raise ValueError(f"unknown region kind {tag!r}")
    if tag in ("halfplane_x", "halfplane_y"):
        _only_keys(body, {"threshold", "side"}, tag)
        return _REGISTRY[tag](float(body["threshold"]), body.get("side", "le"))
    if tag == "rect":
        _only_keys(body, {"x", "y", "x_closed", "y_closed"}, tag)
        return Rect2(
            tuple(body["x"]),
            tuple(body["y"]),
            tuple(body.get("x_closed", (True, True))),
            tuple(body.get("y_closed", (True, True))),
        )
    if tag == "quad":
        return QuadTile(BilinearMap2(*(Point2(*c) for c in body)))
    if tag == "diagonal":
        _only_keys(body, {"side"}, tag)
        return Diagonal(body.get("side", "le"))
    if tag == "everywhere":
        return Everywhere()
    if tag == "not":
        return Complement(region_from_dict(body))
    return _REGISTRY[tag](tuple(region_from_dict(r) for r in body))


def _only_keys(body, allowed, tag):
    if not isinstance(body, dict):
        raise ValueError(f"{tag}: expected a mapping")
    extra = set(body) - allowed
    if extra:
        raise ValueError(f"{tag}: unknown keys {sorted(extra)}")


def minus(tile: Region, earlier: list[Region]) -> Region:
    if not earlier:
        return tile
    return Intersection((tile, Complement(Union(tuple(earlier)))))


# -- masks -----------------------------------------------------------------


@dataclass(frozen=True)
class Mask:
    regions: tuple

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))

    @property
    def n(self) -> int:
        return len(self.regions)

    def membership(self, x, y) -> np.ndarray:
        """(N, ...) boolean array: row i is membership in region i + 1."""
        return np.stack([r.contains(x, y) for r in self.regions])

    def classify_many(self, x, y) -> np.ndarray:
        """1-based region index of each point, 0 where no region applies.

        Points in several regions (an invalid mask) get the lowest index.
        """
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        out = np.zeros(np.broadcast(x, y).shape, dtype=np.int64)
        for i in range(self.n, 0, -1):
            out = np.where(self.regions[i - 1].contains(x, y), i, out)
        return out


def classify(mask: Mask, p) -> int:
    """The unique i with p in M_i."""
    i = int(mask.classify_many(p[0], p[1]))
    if i == 0:
        raise MaskGap(f"no mask region contains {tuple(p)}")
    return i


def threshold_mask_1d(p: float) -> Mask:
    """M_1 = [0, p], M_2 = (p, 1]."""
    return Mask((HalfPlaneX(p, "le"), HalfPlaneX(p, "gt")))


def quadrant_mask(p: float, q: float | None = None) -> Mask:
    """Four-rectangle mask split at x = p, y = q (default q = p).

    M1 = {x <= p, y <= q}, M2 = {x > p, y <= q}, M3 = {x > p, y > q},
    M4 = {x <= p, y > q}.
    """
    q = p if q is None else q
    lo_x, hi_x = HalfPlaneX(p, "le"), HalfPlaneX(p, "gt")
    lo_y, hi_y = HalfPlaneY(q, "le"), HalfPlaneY(q, "gt")
    return Mask(
        (
            Intersection((lo_x, lo_y)),
            Intersection((hi_x, lo_y)),
            Intersection((hi_x, hi_y)),
            Intersection((lo_x, hi_y)),
        )
    )


# -- validation --------------------------------------------------------------


def attractor_samples(ifs: IfsSystem, depth: int | None = None):
    """Exact attractor points f_sigma(fixed point of f_1) for every word sigma
    of length ``depth`` (default: the largest with N**depth <= 4096)."""
    if depth is None:
        depth = max(1, int(np.floor(np.log(4096) / np.log(ifs.n))))
    fx, fy = _fixed_point(ifs, 0)
    words = np.array(np.meshgrid(*[np.arange(1, ifs.n + 1)] * depth, indexing="ij")).reshape(depth, -1).T
    return coding_points(ifs, words, (fx, fy))


def _fixed_point(ifs: IfsSystem, index: int):
    x, y = ifs.domain.center
    m = ifs.maps[index]
    for _ in range(2000):
        nx, ny = m.forward(x, y)
        nx, ny = float(nx), float(ny)
        if nx == x and ny == y:
            break
        x, y = nx, ny
    return x, y


def _dilate(occ: np.ndarray) -> np.ndarray:
    out = occ.copy()
    out[1:, :] |= occ[:-1, :]
    out[:-1, :] |= occ[1:, :]
    grown = out.copy()
    grown[:, 1:] |= out[:, :-1]
    grown[:, :-1] |= out[:, 1:]
    return grown


def _erode(occ: np.ndarray) -> np.ndarray:
    return ~_dilate(~occ)


def validation_points(ifs: IfsSystem, grid: int = VALIDATION_GRID, raster=None):
    """Grid points lying well inside the attractor raster, plus exact
    attractor points."""
    raster = attractor_deterministic(ifs, VALIDATION_ITERATIONS, grid) if raster is None else raster
    gx, gy = ifs.domain.grid(grid)
    ix, iy, ok = cell_indices(ifs.domain, gx, gy, grid)
    core = _erode(raster) if ifs.domain.height > 0 and ifs.domain.width > 0 else raster
    keep = ok & core[iy, ix]
    ax, ay = attractor_samples(ifs)
    return np.concatenate([gx[keep], ax]), np.concatenate([gy[keep], ay]), raster


def validate_mask(ifs: IfsSystem, mask: Mask, grid: int = VALIDATION_GRID, check_subset: bool = True) -> None:
    """Grid spot-check of the mask conditions.

    Raises MaskGap (a point in no region), MaskOverlap (a point in two) or
    MaskNotSubset (a point of M_i whose f_i-preimage is off the attractor).
    """
    if mask.n != ifs.n:
        raise ValueError(f"mask has {mask.n} regions but the IFS has {ifs.n} maps")
    x, y, raster = validation_points(ifs, grid)
    member = mask.membership(x, y)
    hits = member.sum(axis=0)
    if np.any(hits == 0):
        k = int(np.argmax(hits == 0))
        raise MaskGap(f"mask leaves ({x[k]:.6g}, {y[k]:.6g}) uncovered")
    if np.any(hits > 1):
        k = int(np.argmax(hits > 1))
        raise MaskOverlap(f"mask regions overlap at ({x[k]:.6g}, {y[k]:.6g})")
    if not check_subset:
        return
    near = _dilate(raster)
    for i in range(mask.n):
        sel = member[i]
        if not np.any(sel):
            continue
        px, py = ifs.maps[i].inverse(x[sel], y[sel], strict=False)
        jx, jy, ok = cell_indices(ifs.domain, px, py, grid, tol=TOL.domain)
        good = ok & near[jy, jx]
        if not np.all(good):
            k = int(np.argmax(~good))
            raise MaskNotSubset(
                f"region {i + 1} contains ({x[sel][k]:.6g}, {y[sel][k]:.6g}) outside f_{i + 1}(A)"
            )


def tops_mask(ifs: IfsSystem, tiles, validate: bool = True) -> Mask:
    """M_i = tile_i minus the union of tile_j, j < i (lowest index wins)."""
    tiles = list(tiles)
    if len(tiles) != ifs.n:
        raise ValueError("need one tile per map")
    mask = Mask(tuple(minus(t, tiles[:i]) for i, t in enumerate(tiles)))
    if validate:
        x, y, _ = validation_points(ifs)
        hits = mask.membership(x, y).sum(axis=0)
        if np.any(hits == 0):
            k = int(np.argmax(hits == 0))
            raise MaskGap(f"tiles leave ({x[k]:.6g}, {y[k]:.6g}) uncovered")
    return mask


# -- masked dynamics ----------------------------------------------------------


def _clamp_to_domain(ifs: IfsSystem, x, y, strict: bool):
    dom = ifs.domain
    near = dom.contains(x, y, TOL.domain) & np.isfinite(x) & np.isfinite(y)
    if strict and not np.all(near):
        k = int(np.argmax(~near))
        raise OrbitEscape(f"masked orbit left the domain at ({x.flat[k]!r}, {y.flat[k]!r})")
    cx, cy = dom.clamp(x, y)
    return cx, cy, near


def masked_orbit(ifs: IfsSystem, mask: Mask, x, y, depth: int, strict: bool = True):
    """Run the masked system ``depth`` steps from every point at once.

    Returns ``(symbols, x_K, y_K, valid)``: ``symbols`` is (M, depth) with
    1-based entries. With ``strict=False`` points that hit a gap or leave the
    domain are flagged invalid (their remaining symbols are 0) instead of
    raising.
    """
    x = np.array(x, dtype=np.float64, ndmin=1, copy=True)
    y = np.array(y, dtype=np.float64, ndmin=1, copy=True)
    valid = np.ones(x.shape, dtype=bool)
    symbols = np.zeros(x.shape + (depth,), dtype=np.uint8 if ifs.n < 256 else np.int32)
    for k in range(depth):
        s = mask.classify_many(x, y)
        s[~valid] = 0
        gap = valid & (s == 0)
        if np.any(gap):
            if strict:
                i = int(np.argmax(gap))
                raise MaskGap(f"orbit point ({x.flat[i]!r}, {y.flat[i]!r}) is in no mask region")
            valid &= ~gap
        symbols[..., k] = s
        nx, ny = ifs.inverse_by_symbol(s, x, y, strict=strict)
        nx = np.where(valid, nx, x)
        ny = np.where(valid, ny, y)
        x, y, near = _clamp_to_domain(ifs, nx, ny, strict)
        valid &= near
    return symbols, x, y, valid


def masked_step(ifs: IfsSystem, mask: Mask, p) -> tuple[int, Point2]:
    """(i, f_i^{-1}(p)) for the region i containing p."""
    s, x, y, _ = masked_orbit(ifs, mask, [p[0]], [p[1]], 1)
    return int(s[0, 0]), Point2(float(x[0]), float(y[0]))


def masked_address(ifs: IfsSystem, mask: Mask, p, depth: int) -> Address:
    s, _, _, _ = masked_orbit(ifs, mask, [p[0]], [p[1]], depth)
    return Address(tuple(int(v) for v in s[0]))


def shift(addr: Address) -> Address:
    if len(addr) == 0:
        raise EmptyAddress("cannot shift an empty address")
    return Address(addr.symbols[1:])
