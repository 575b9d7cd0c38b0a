"""Pictures and the imaging applications of fractal transformations.

A :class:`Picture` is an RGBA raster over a rectangle (the unit square
unless stated otherwise). Pixel ``(col, row)`` has its centre at
``((col + 0.5) / width, 1 - (row + 0.5) / height)``: row 0 is the top.
Unpainted pixels are fully transparent so that "never painted" and
"painted black" stay distinguishable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from . import _kernels
from .geometry import image_area
from .ifs import (
    UNIT_SQUARE,
    IfsSystem,
    Rect,
    attractor_deterministic,
    cell_centers,
    cell_indices,
    chaos_orbit,
    domain_raster,
    recommended_depth,
)
from .parallel import map_rows, row_chunks
from .rng import check_probabilities, derive_seed, symbol_stream
from .sections import HalfPlaneX, HalfPlaneY, Mask
from .transform import FractalTransform, HomeoPair, SectionSystem, transform_points, transform_raster

WHITE = np.array([255, 255, 255, 255], dtype=np.uint8)
DEFAULT_SUPERSAMPLE = 4


@dataclass(frozen=True, eq=False)
class Picture:
    rgba: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.rgba)
        if a.ndim != 3 or a.shape[2] != 4 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("a picture is an (height, width, 4) array")
        object.__setattr__(self, "rgba", np.ascontiguousarray(a, dtype=np.uint8))

    @property
    def width(self) -> int:
        return self.rgba.shape[1]

    @property
    def height(self) -> int:
        return self.rgba.shape[0]

    def __eq__(self, other):
        return isinstance(other, Picture) and np.array_equal(self.rgba, other.rgba)

    @classmethod
    def from_array(cls, data) -> "Picture":
        """Accepts gray (H, W), RGB (H, W, 3) or RGBA (H, W, 4) uint8 data."""
        a = np.asarray(data, dtype=np.uint8)
        if a.ndim == 2:
            a = np.repeat(a[:, :, None], 3, axis=2)
        if a.shape[2] == 3:
            a = np.concatenate([a, np.full(a.shape[:2] + (1,), 255, dtype=np.uint8)], axis=2)
        return cls(a)

    @classmethod
    def blank(cls, width: int, height: int | None = None) -> "Picture":
        return cls(np.zeros((height or width, width, 4), dtype=np.uint8))

    @classmethod
    def constant(cls, color, width: int, height: int | None = None) -> "Picture":
        c = np.asarray(tuple(color) + ((255,) if len(color) == 3 else ()), dtype=np.uint8)
        return cls(np.broadcast_to(c, (height or width, width, 4)).copy())

    @classmethod
    def load(cls, path) -> "Picture":
        with Image.open(path) as im:
            return cls(np.asarray(im.convert("RGBA")))

    def save(self, path, grayscale: bool = False) -> None:
        """Write an 8-bit PNG; ``grayscale`` keeps only the first channel."""
        im = Image.fromarray(self.rgba[:, :, 0], mode="L") if grayscale else Image.fromarray(self.rgba, mode="RGBA")
        im.save(Path(path), format="PNG")

    def painted(self) -> np.ndarray:
        return self.rgba[:, :, 3] > 0

    def over_black(self) -> "Picture":
        """Composite onto an opaque black background."""
        a = self.rgba[:, :, 3:4].astype(np.uint16)
        rgb = (self.rgba[:, :, :3].astype(np.uint16) * a + 127) // 255
        return Picture.from_array(rgb.astype(np.uint8))

    def resample(self, width: int, height: int | None = None) -> "Picture":
        """Nearest-neighbour resample onto a ``width`` x ``height`` grid."""
        height = height or width
        x, y = pixel_centers(width, height)
        return Picture(sample_nearest(self, x, y))

    def to_image(self) -> Image.Image:
        return Image.fromarray(self.rgba, mode="RGBA")


def pixel_centers(width: int, height: int, rect: Rect = UNIT_SQUARE, rows=None):
    """Domain coordinates of pixel centres, shape (rows, width)."""
    r0, r1 = (0, height) if rows is None else rows
    u = (np.arange(width) + 0.5) / width
    v = 1.0 - (np.arange(r0, r1) + 0.5) / height
    uu, vv = np.meshgrid(u, v)
    if rect.height == 0:
        vv = np.zeros_like(vv)
    if rect.width == 0:
        uu = np.zeros_like(uu)
    return rect.denormalize(uu, vv)


def pixel_index(width: int, height: int, x, y, rect: Rect = UNIT_SQUARE, tol: float = 1e-9):
    """(row, col, inside) of the pixel containing each point."""
    u, v = rect.normalize(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    with np.errstate(invalid="ignore"):
        inside = (u >= -tol) & (u <= 1 + tol) & (v >= -tol) & (v <= 1 + tol)
    inside &= np.isfinite(u) & np.isfinite(v)
    u = np.where(inside, u, 0.0)
    v = np.where(inside, v, 0.0)
    col = np.clip(np.floor(u * width).astype(np.int64), 0, width - 1)
    row = np.clip(np.floor((1.0 - v) * height).astype(np.int64), 0, height - 1)
    return row, col, inside


def sample_nearest(pic: Picture, x, y, rect: Rect = UNIT_SQUARE) -> np.ndarray:
    row, col, inside = pixel_index(pic.width, pic.height, x, y, rect)
    out = pic.rgba[row, col]
    out[~inside] = 0
    return out


def exact_match_fraction(a: Picture, b: Picture, where=None) -> float:
    same = np.all(a.rgba == b.rgba, axis=2)
    if where is not None:
        same = same[where]
    return float(same.mean()) if same.size else 1.0


def psnr(a: Picture, b: Picture) -> float:
    diff = a.rgba[:, :, :3].astype(np.float64) - b.rgba[:, :, :3].astype(np.float64)
    mse = float(np.mean(diff**2))
    return float("inf") if mse == 0 else 10.0 * np.log10(255.0**2 / mse)


def mean_abs_error(a: Picture, b: Picture) -> np.ndarray:
    """Per-channel (RGB) mean absolute error."""
    diff = np.abs(a.rgba[:, :, :3].astype(np.int32) - b.rgba[:, :, :3].astype(np.int32))
    return diff.reshape(-1, 3).mean(axis=0)


# -- forward splatting --------------------------------------------------------


def _supersample_points(src: Picture, rect: Rect, supersample: int, rows):
    """Sub-pixel sample points of source rows [r0, r1) and their pixel ids."""
    r0, r1 = rows
    w, h = src.width, src.height
    offs = (np.arange(supersample) + 0.5) / supersample
    cols = np.arange(w)
    rr = np.arange(r0, r1)
    # ordering: source row, sub-row, column, sub-column
    u = ((cols[:, None] + offs[None, :]) / w).ravel()
    v = 1.0 - ((rr[:, None] + offs[None, :]) / h).ravel()
    uu, vv = np.meshgrid(u, v)
    pid = (np.repeat(rr, supersample)[:, None] * w + np.repeat(cols, supersample)[None, :])
    x, y = rect.denormalize(uu.ravel(), vv.ravel())
    return x, y, pid.ravel()


def splat_targets(push: FractalTransform, src: Picture, out_resolution: int, supersample: int, threads=None):
    """Flat output cell (or -1) and source pixel id for every sub-sample."""
    src_rect = push.source.ifs.domain
    dst_rect = push.target.domain

    def rows(r0, r1):
        x, y, pid = _supersample_points(src, src_rect, supersample, (r0, r1))
        tx, ty, ok = transform_points(push, x, y, strict=False)
        row, col, inside = pixel_index(out_resolution, out_resolution, tx, ty, dst_rect)
        cell = np.where(ok & inside, row * out_resolution + col, -1)
        return cell, pid

    parts = map_rows(rows, src.height, threads)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def splat(push: FractalTransform, src: Picture, out_resolution: int, supersample: int = DEFAULT_SUPERSAMPLE, threads=None):
    cell, pid = splat_targets(push, src, out_resolution, supersample, threads)
    canvas = np.zeros((out_resolution * out_resolution, 4), dtype=np.uint8)
    written = np.zeros(out_resolution * out_resolution, dtype=bool)
    _kernels.paint_last_wins(canvas, cell, src.rgba.reshape(-1, 4), pid, written)
    return canvas.reshape(out_resolution, out_resolution, 4), written.reshape(out_resolution, out_resolution)


_NEIGHBOURS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def fill_holes(canvas: np.ndarray, written: np.ndarray) -> "Picture":
    """One pass: an unwritten pixel with at least 5 written neighbours takes
    the most common colour among them (first in scan order on ties)."""
    h, w = written.shape
    packed = canvas.astype(np.int64)
    packed = (packed[..., 0] << 24) | (packed[..., 1] << 16) | (packed[..., 2] << 8) | packed[..., 3]
    packed = np.where(written, packed, -1)
    padded = np.pad(packed, 1, constant_values=-1)
    neigh = np.stack([padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w] for dy, dx in _NEIGHBOURS], axis=-1)
    valid = neigh >= 0
    votes = (neigh[..., :, None] == neigh[..., None, :]).sum(axis=-1) * valid
    best = np.take_along_axis(neigh, votes.argmax(axis=-1)[..., None], axis=-1)[..., 0]
    fill = ~written & (valid.sum(axis=-1) >= 5)
    out = canvas.copy()
    b = best[fill]
    out[fill] = np.stack([(b >> 24) & 255, (b >> 16) & 255, (b >> 8) & 255, b & 255], axis=-1).astype(np.uint8)
    return Picture(out)


# -- colour stealing ------------------------------------------------------------


def color_steal(
    drawing: SectionSystem,
    palette_ifs: IfsSystem,
    palette_picture: Picture,
    out_resolution: int,
    raster_iterations: int | None = None,
    threads: int | None = None,
) -> Picture:
    """Paint the drawing attractor with colours read through a second IFS.

    Each attractor pixel x takes the palette colour at pi'(tau(x)), the
    palette IFS evaluated on the masked address of x. Pixels off the
    attractor raster, or whose masked orbit fails, stay transparent.
    """
    if drawing.ifs.n != palette_ifs.n:
        raise ValueError("drawing and palette systems must share N")
    ifs = drawing.ifs
    if raster_iterations is None:
        raster_iterations = max(12, recommended_depth(ifs, ifs.diam / out_resolution) + 2)
    raster = attractor_deterministic(ifs, raster_iterations, out_resolution)
    on_attractor = np.flipud(raster)  # picture rows run top-down
    steal = FractalTransform(drawing, palette_ifs, drawing.depth)
    out = np.zeros((out_resolution, out_resolution, 4), dtype=np.uint8)

    def rows(r0, r1):
        x, y = pixel_centers(out_resolution, out_resolution, ifs.domain, rows=(r0, r1))
        sel = on_attractor[r0:r1]
        block = np.zeros((r1 - r0, out_resolution, 4), dtype=np.uint8)
        px, py, ok = transform_points(steal, x[sel], y[sel], strict=False)
        colors = sample_nearest(palette_picture, px, py, palette_ifs.domain)
        colors[~ok] = 0
        block[sel] = colors
        return block

    for (r0, r1), block in zip(row_chunks(out_resolution), map_rows(rows, out_resolution, threads)):
        out[r0:r1] = block
    return Picture(out)


def _keep_last(flat: np.ndarray) -> np.ndarray:
    """Positions of the last occurrence of each value in ``flat``."""
    _, first_rev = np.unique(flat[::-1], return_index=True)
    return flat.size - 1 - first_rev


def color_steal_tops(
    drawing_ifs: IfsSystem,
    palette_ifs: IfsSystem,
    palette_picture: Picture,
    out_resolution: int,
    iterations: int | None = None,
) -> Picture:
    """Colour-stealing with the fractal tops address, computed forwards.

    Set iteration on the pixel grid carries one palette point per occupied
    cell: the image of cell c under f_i receives g_i of c's palette point.
    Maps are painted from N down to 1, so the lowest index wins where tiles
    overlap. No inverse maps are evaluated, which keeps this usable for
    systems (such as projective ones) whose inverse branches amplify
    pixel-size errors.
    """
    if drawing_ifs.n != palette_ifs.n:
        raise ValueError("drawing and palette systems must share N")
    res = out_resolution
    dom = drawing_ifs.domain
    if iterations is None:
        iterations = max(12, recommended_depth(drawing_ifs, drawing_ifs.diam / res) + 2)
    occ = domain_raster(dom, res)
    c = palette_ifs.domain.center
    lx = np.full(res * res, c.x)
    ly = np.full(res * res, c.y)
    for _ in range(iterations):
        iy, ix = np.nonzero(occ)
        cx, cy = cell_centers(dom, ix, iy, res)
        src = iy * res + ix
        cells, vals_x, vals_y = [], [], []
        for i in range(drawing_ifs.n - 1, -1, -1):
            x, y = drawing_ifs.maps[i].forward(cx, cy, strict=False)
            jx, jy, ok = cell_indices(dom, x, y, res)
            gx, gy = palette_ifs.maps[i].forward(lx[src[ok]], ly[src[ok]])
            cells.append(jy[ok] * res + jx[ok])
            vals_x.append(gx)
            vals_y.append(gy)
        cells = np.concatenate(cells)
        keep = _keep_last(cells)
        lx[cells[keep]] = np.concatenate(vals_x)[keep]
        ly[cells[keep]] = np.concatenate(vals_y)[keep]
        occ = np.zeros(res * res, dtype=bool)
        occ[cells] = True
        occ = occ.reshape(res, res)
    flat = occ.ravel()
    out = np.zeros((res * res, 4), dtype=np.uint8)
    out[flat] = sample_nearest(palette_picture, lx[flat], ly[flat], palette_ifs.domain)
    return Picture(np.flipud(out.reshape(res, res, 4)))


# -- fractal filter ---------------------------------------------------------------


def fractal_filter(img: Picture, pair: HomeoPair, grid_resolution: int, threads: int | None = None) -> Picture:
    """T_GF o P o T_FG applied to ``img``, P being projection onto a
    ``grid_resolution`` pixel lattice.

    The transformed picture is built directly on the coarse lattice, which
    is the projection; pulling it back through T_FG gives the result.
    """
    if img.width != img.height:
        raise ValueError("fractal_filter expects a square picture")
    if grid_resolution > img.width:
        raise ValueError("grid_resolution exceeds the picture resolution")
    middle = transform_raster(pair.backward, img, grid_resolution, threads)
    return transform_raster(pair.forward, middle, img.width, threads)


# -- masked packing -------------------------------------------------------------


def threshold_mask(p: float, axis: str = "y") -> Mask:
    """Two regions split at ``p`` along ``axis``; the lower one is closed."""
    half = {"x": HalfPlaneX, "y": HalfPlaneY}[axis]
    return Mask((half(p, "le"), half(p, "gt")))


def packing_transform(p: float, f_template: IfsSystem, g: IfsSystem, axis: str = "y", depth: int | None = None):
    return FractalTransform(SectionSystem(f_template, threshold_mask(p, axis), depth), g, depth)


def pack_masked(
    sources: Sequence[tuple[Picture, float]],
    f_template: IfsSystem,
    g: IfsSystem,
    out_resolution: int,
    supersample: int = DEFAULT_SUPERSAMPLE,
    axis: str = "y",
    depth: int | None = None,
    threads: int | None = None,
) -> Picture:
    """Store several pictures in one through T^(p)_FG, one threshold each.

    Every supersampled pixel of source j is written where T^(p_j) sends it.
    Cells claimed by two different sources become white; isolated holes are
    then filled by the 3x3 majority rule.
    """
    thresholds = [p for _, p in sources]
    if len(set(thresholds)) != len(thresholds):
        raise ValueError("thresholds must be distinct")
    n_cells = out_resolution * out_resolution
    canvas = np.zeros((n_cells, 4), dtype=np.uint8)
    written = np.zeros(n_cells, dtype=bool)
    owner = np.full(n_cells, -1, dtype=np.int64)
    for j, (pic, p) in enumerate(sources):
        t = packing_transform(p, f_template, g, axis, depth)
        cell, pid = splat_targets(t, pic, out_resolution, supersample, threads)
        mine = np.zeros(n_cells, dtype=bool)
        _kernels.paint_last_wins(canvas, cell, pic.rgba.reshape(-1, 4), pid, mine)
        clash = mine & (owner >= 0) & (owner != j)
        owner = np.where(mine & (owner == -1), j, owner)
        owner[clash] = -2
        written |= mine
    canvas[owner == -2] = WHITE
    return fill_holes(canvas.reshape(out_resolution, out_resolution, 4), written.reshape(out_resolution, out_resolution))


def unpack_masked(
    combined: Picture,
    p: float,
    f_template: IfsSystem,
    g: IfsSystem,
    out_resolution: int,
    axis: str = "y",
    depth: int | None = None,
    threads: int | None = None,
) -> Picture:
    """Recover the picture stored at threshold ``p``: combined o T^(p)_FG."""
    t = packing_transform(p, f_template, g, axis, depth)
    return transform_raster(t, combined, out_resolution, threads)


def collision_fraction(combined: Picture) -> float:
    return float(np.all(combined.rgba == WHITE, axis=2).mean())


# -- measure-theoretic packing ---------------------------------------------------


def area_probabilities(ifs: IfsSystem) -> np.ndarray:
    """p_i = area(f_i(domain)) / area(domain), normalised to sum 1."""
    d = ifs.domain
    areas = np.array([image_area(m, (d.x0, d.x1, d.y0, d.y1)) for m in ifs.maps]) / (d.width * d.height)
    return areas / areas.sum()


def _coupled_indices(source_ifs, carrier, probs, iterations, seed, src_shape, dst_shape, start):
    symbols = symbol_stream(probs, iterations, seed)
    xs, ys = chaos_orbit(source_ifs, symbols, start)
    zs, ws = chaos_orbit(carrier, symbols, start)
    sr, sc, s_ok = pixel_index(src_shape[1], src_shape[0], xs, ys, source_ifs.domain)
    dr, dc, d_ok = pixel_index(dst_shape[1], dst_shape[0], zs, ws, carrier.domain)
    ok = s_ok & d_ok
    return np.where(ok, sr * src_shape[1] + sc, -1), np.where(ok, dr * dst_shape[1] + dc, -1)


ORIGIN = (0.0, 0.0)


def encode_measure(
    sources: Sequence[tuple[Picture, IfsSystem, Sequence[float], int]],
    carrier: IfsSystem,
    out_resolution: int,
    seed: int,
    start=ORIGIN,
) -> Picture:
    """Coupled chaos game encoder.

    Source j drives X_k = f_s(X_{k-1}) in its own system and
    Z_k = h_s(Z_{k-1}) in the carrier with a shared symbol stream seeded
    ``seed ^ j``; E's pixel at Z_k takes the source colour at X_k. Sources
    are processed in order and later writes overwrite earlier ones.
    """
    e = np.zeros((out_resolution * out_resolution, 4), dtype=np.uint8)
    visited = np.zeros(out_resolution * out_resolution, dtype=bool)
    for j, (pic, ifs, probs, iterations) in enumerate(sources):
        if ifs.n != carrier.n:
            raise ValueError("source and carrier systems must share N")
        p = check_probabilities(probs, ifs.n)
        src_idx, dst_idx = _coupled_indices(
            ifs, carrier, p, int(iterations), derive_seed(seed, j), pic.rgba.shape[:2], (out_resolution, out_resolution), start
        )
        _kernels.paint_last_wins(e, dst_idx, pic.rgba.reshape(-1, 4), src_idx, visited)
    return Picture(e.reshape(out_resolution, out_resolution, 4))


def decode_measure(
    encoded: Picture,
    source_ifs: IfsSystem,
    probs: Sequence[float],
    carrier: IfsSystem,
    iterations: int,
    seed: int,
    out_resolution: int,
    start=ORIGIN,
    return_visited: bool = False,
):
    """Coupled chaos game decoder: the output pixel at X_k takes E's colour
    at Z_k. Unvisited pixels stay transparent."""
    if source_ifs.n != carrier.n:
        raise ValueError("source and carrier systems must share N")
    p = check_probabilities(probs, source_ifs.n)
    out = np.zeros((out_resolution * out_resolution, 4), dtype=np.uint8)
    visited = np.zeros(out_resolution * out_resolution, dtype=bool)
    if iterations > 0:
        src_idx, dst_idx = _coupled_indices(
            source_ifs, carrier, p, int(iterations), seed, (out_resolution, out_resolution), encoded.rgba.shape[:2], start
        )
        _kernels.paint_last_wins(out, src_idx, encoded.rgba.reshape(-1, 4), dst_idx, visited)
    pic = Picture(out.reshape(out_resolution, out_resolution, 4))
    if return_visited:
        return pic, visited.reshape(out_resolution, out_resolution)
    return pic
