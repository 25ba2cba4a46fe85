"""Ternary diagrams of three-part prediction regions."""

from __future__ import annotations

import numpy as np

from .exceptions import UnsupportedDimensionError

__all__ = ["TRIANGLE", "ternary_xy", "box_polygon", "region_outline", "emit_ternary_plot"]

# corners for parts 1, 2, 3
TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])


def ternary_xy(y) -> np.ndarray:
    """Barycentric projection of composition(s) onto the plotting triangle."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != 3:
        raise UnsupportedDimensionError("ternary plots need exactly three parts")
    return y @ TRIANGLE


def _clip(poly, normal, offset):
    # keep the part of a convex polygon where poly @ normal >= offset
    out = []
    n = len(poly)
    for k in range(n):
        a, b = poly[k], poly[(k + 1) % n]
        da, db = a @ normal - offset, b @ normal - offset
        if da >= 0:
            out.append(a)
        if (da >= 0) != (db >= 0):
            out.append(a + (b - a) * (da / (da - db)))
    return out


def box_polygon(lo, hi) -> np.ndarray:
    """Vertices (in composition coordinates) of ``{y in simplex : lo <= y <= hi}``."""
    poly = list(np.eye(3))
    for j in range(3):
        e = np.eye(3)[j]
        poly = _clip(poly, e, lo[j])
        if poly:
            poly = _clip(poly, -e, -hi[j])
        if not poly:
            return np.empty((0, 3))
    return np.array(poly)


def region_outline(region) -> np.ndarray:
    """Outline of a box or floor region in composition coordinates."""
    from .conformal import BoxRegion
    from .hdr import FloorPolytope, LevelSetGrid

    if isinstance(region, BoxRegion):
        return box_polygon(region.lo, region.hi)
    if isinstance(region, LevelSetGrid):
        region = region.floor
    if isinstance(region, FloorPolytope):
        tau = region.tau
        return tau + (1.0 - tau.sum()) * np.eye(3)
    raise TypeError(f"cannot outline {type(region).__name__}")


def emit_ternary_plot(region, mean, truth, path, title=None):
    """Draw ``region`` with the predicted mean and the observed point; save to ``path``.

    Boxes are drawn as outlines, floor polytopes as shaded triangles and
    level-set grids as point clouds inside their (dashed) floor triangle.
    The file format follows the extension (SVG by default in the CLI).
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import Polygon

    from .conformal import BoxRegion
    from .hdr import FloorPolytope, LevelSetGrid

    if region.D != 3:
        raise UnsupportedDimensionError("ternary plots need exactly three parts")
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.add_patch(Polygon(TRIANGLE, closed=True, fill=False, color="0.3", lw=1))
    for corner, label, off in zip(TRIANGLE, ("y1", "y2", "y3"),
                                  ((-0.05, -0.05), (0.01, -0.05), (-0.02, 0.02))):
        ax.text(corner[0] + off[0], corner[1] + off[1], label)
    if isinstance(region, BoxRegion):
        poly = ternary_xy(box_polygon(region.lo, region.hi))
        if len(poly):
            ax.add_patch(Polygon(poly, closed=True, fill=False, color="tab:blue", lw=1.5,
                                 label="prediction region"))
    elif isinstance(region, LevelSetGrid):
        ax.add_patch(Polygon(ternary_xy(region_outline(region.floor)), closed=True, fill=False,
                             color="tab:red", ls="--", lw=1, label="floor polytope"))
        if region.accepted.shape[0]:
            xy = ternary_xy(region.accepted)
            ax.scatter(xy[:, 0], xy[:, 1], s=2, color="tab:blue", alpha=0.5,
                       label="prediction region")
    elif isinstance(region, FloorPolytope):
        ax.add_patch(Polygon(ternary_xy(region_outline(region)), closed=True, color="tab:red",
                             alpha=0.25, label="prediction region"))
    else:
        raise TypeError(f"cannot plot {type(region).__name__}")
    m = ternary_xy(mean)
    t = ternary_xy(truth)
    ax.scatter([m[0]], [m[1]], marker="o", s=70, color="gold", edgecolor="k", zorder=5,
               label="estimated mean")
    ax.scatter([t[0]], [t[1]], marker="D", s=50, color="red", edgecolor="k", zorder=6,
               label="observed point")
    ax.set_xlim(-0.08, 1.08)
    ax.set_ylim(-0.08, 0.95)
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8, frameon=False)
    fig.savefig(path)
    plt.close(fig)
    return path
