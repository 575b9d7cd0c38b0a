"""Report figures rendered with matplotlib's Agg backend.

Figures are written without the software/date metadata matplotlib adds by
default, so identical inputs give byte-identical PNGs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_PNG_METADATA = {"Software": None}


def _save(fig, path) -> None:
    fig.savefig(path, format="png", dpi=100, metadata=_PNG_METADATA)
    plt.close(fig)


def pstar_figure(raster: np.ndarray, p_star: float, a: float, b: float, path) -> None:
    """Attractor raster with the line y = 1 - x and the point (p*, 1 - p*)."""
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(raster, origin="lower", extent=(0, 1, 0, 1), cmap="Greys", interpolation="nearest")
    ax.plot([0, 1], [1, 0], color="red", linewidth=0.8)
    ax.plot([p_star], [1 - p_star], marker="o", markersize=5, color="tab:blue")
    ax.axvspan(1 - b, a, color="tab:orange", alpha=0.08)
    ax.set_title(f"a={a:.4g}, b={b:.4g}: p* = {p_star:.4f}")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    _save(fig, path)


def escape_figure(steps: np.ndarray, max_iter: int, a: float, b: float, path) -> None:
    """Escape-step map; never-escaped pixels are drawn at max_iter + 1."""
    shown = np.where(steps < 0, max_iter + 1, steps)
    fig, ax = plt.subplots(figsize=(5.6, 5))
    im = ax.imshow(shown, extent=(0, 1, 0, 1), cmap="magma", interpolation="nearest")
    ax.plot([0, 1], [1, 0], color="cyan", linewidth=0.6)
    fig.colorbar(im, ax=ax, label="escape step")
    ax.set_title(f"escape time, a={a:.4g}, b={b:.4g}")
    fig.tight_layout()
    _save(fig, path)
