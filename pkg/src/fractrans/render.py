"""Diagnostic renderers: repeller escape times and chaos-game densities."""

from __future__ import annotations

import numpy as np

from .ifs import IfsSystem, attractor_chaos_game
from .imaging import Picture, pixel_centers
from .parallel import map_rows

ESCAPE_MARGIN = 0.01


def escape_counts(a: float, b: float, resolution: int, max_iter: int, threads: int | None = None) -> np.ndarray:
    """Step at which each pixel centre leaves the box, or -1 if it never does.

    The dynamics invert the two-map system ((a x, b y), (b x + 1 - b, a y + 1 - a)):
    points with x + y <= 1 go through the first inverse, the rest through
    the second. Rows are top-down, like pictures.
    """
    if not (a >= b > 0 and a + b >= 1):
        raise ValueError("need a >= b > 0 and a + b >= 1")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    lo, hi = -ESCAPE_MARGIN, 1.0 + ESCAPE_MARGIN

    def rows(r0, r1):
        x, y = pixel_centers(resolution, resolution, rows=(r0, r1))
        x, y = x.ravel(), y.ravel()
        steps = np.full(x.size, -1, dtype=np.int64)
        live = np.arange(x.size)
        for k in range(1, max_iter + 1):
            lower = x + y <= 1.0
            x = np.where(lower, x / a, (x - 1 + b) / b)
            y = np.where(lower, y / b, (y - 1 + a) / a)
            out = (x < lo) | (x > hi) | (y < lo) | (y > hi)
            steps[live[out]] = k
            keep = ~out
            live, x, y = live[keep], x[keep], y[keep]
            if live.size == 0:
                break
        return steps.reshape(r1 - r0, resolution)

    return np.concatenate(map_rows(rows, resolution, threads), axis=0)


def render_repeller_escape(a: float, b: float, resolution: int, max_iter: int, threads: int | None = None) -> Picture:
    """Grayscale escape-time picture; never-escaped pixels are white (255)
    and escape at step k maps linearly to floor(254 k / max_iter)."""
    steps = escape_counts(a, b, resolution, max_iter, threads)
    gray = np.where(steps < 0, 255, (254 * steps) // max_iter).astype(np.uint8)
    return Picture.from_array(gray)


def render_attractor_density(
    ifs: IfsSystem,
    probs,
    n: int,
    seed: int,
    resolution: int,
    orbits: int = 1,
    threads: int | None = None,
) -> Picture:
    """Log-scaled chaos-game visit counts, 255 * log(1 + c) / log(1 + max).

    Systems on an interval render as a strip ``resolution // 8`` pixels tall.
    """
    counts = attractor_chaos_game(ifs, probs, n, seed, resolution, orbits=orbits, threads=threads)
    top = counts.max()
    level = np.zeros(counts.shape, dtype=np.uint8)
    if top > 0:
        level = np.floor(255.0 * np.log1p(counts) / np.log1p(top) + 1e-9).astype(np.uint8)
    if ifs.domain.height == 0:
        gray = np.repeat(level[:1], max(1, resolution // 8), axis=0)
    elif ifs.domain.width == 0:
        gray = np.repeat(np.flipud(level[:, :1]), max(1, resolution // 8), axis=1)
    else:
        gray = np.flipud(level)
    return Picture.from_array(gray)

