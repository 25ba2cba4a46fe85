"""CSV tables of evaluation summaries and per-point regions."""

from __future__ import annotations

import csv
import math

from .simulation import EvalSummary

__all__ = ["summary_columns", "write_summaries", "read_summaries", "write_regions", "read_region"]


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def summary_columns(D: int = 3):
    return (
        ["scenario", "method", "coverage_pct"]
        + [f"cov_y{j + 1}" for j in range(D)]
        + [f"width_y{j + 1}" for j in range(D)]
        + ["mean_time_s", "failures"]
    )


def write_summaries(summaries, path, timing: bool = True):
    """Write one row per (scenario, method).

    Floats are written with full round-trip precision.  With
    ``timing=False`` the wall-clock column is left blank so that repeated
    runs produce identical files.
    """
    D = max(len(s.mean_widths) for s in summaries)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(summary_columns(D))
        for s in summaries:
            indiv = list(s.individual_coverage) if s.individual_coverage else [None] * D
            w.writerow(
                [s.scenario, s.method, _fmt(s.empirical_coverage)]
                + [_fmt(v) for v in indiv]
                + [_fmt(v) for v in s.mean_widths]
                + [_fmt(s.mean_time_seconds) if timing else "", s.failures]
            )


def read_summaries(path):
    """Parse a file written by :func:`write_summaries`."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        D = sum(1 for k in r if k.startswith("width_y"))
        cov = [r[f"cov_y{j + 1}"] for j in range(D)]
        out.append(EvalSummary(
            r["scenario"],
            r["method"],
            float(r["coverage_pct"]),
            tuple(float(r[f"width_y{j + 1}"]) for j in range(D)),
            float(r["mean_time_s"]) if r["mean_time_s"] else math.nan,
            tuple(float(v) for v in cov) if all(cov) else None,
            int(r["failures"]),
        ))
    return out


def _region_columns(D):
    idx = range(1, D + 1)
    return (
        ["index", "method"]
        + [f"mu_{j}" for j in idx] + ["phi"]
        + [f"y_{j}" for j in idx] + ["covered", "q"]
        + [f"lo_{j}" for j in idx] + [f"hi_{j}" for j in idx]
        + [f"tau_{j}" for j in idx] + ["t_star"] + [f"w_{j}" for j in idx]
        + [f"width_{j}" for j in idx] + ["grid_m"]
    )


def write_regions(records, path):
    """Write per-test-point regions produced by :func:`predict_regions`."""
    from .conformal import BoxRegion
    from .hdr import LevelSetGrid

    D = records[0].mp.D
    blank = [""] * D
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_region_columns(D))
        for r in records:
            reg = r.region
            floor = reg.floor if isinstance(reg, LevelSetGrid) else reg
            box = isinstance(reg, BoxRegion)
            y = blank if r.y is None else [_fmt(float(v)) for v in r.y]
            w.writerow(
                [r.index, r.method]
                + [_fmt(float(v)) for v in r.mp.mu] + [_fmt(float(r.mp.phi))]
                + y + ["" if r.covered is None else int(r.covered), _fmt(float(r.q))]
                + ([_fmt(float(v)) for v in reg.lo] if box else blank)
                + ([_fmt(float(v)) for v in reg.hi] if box else blank)
                + (blank if box else [_fmt(float(v)) for v in floor.tau])
                + ([""] if box else [_fmt(float(floor.level.t_star))])
                + (blank if box else [_fmt(float(v)) for v in floor.level.w])
                + [_fmt(float(v)) for v in reg.widths()]
                + [reg.points_per_axis if isinstance(reg, LevelSetGrid) else ""]
            )


def read_region(path, row: int = 0):
    """Rebuild ``(region, mean, observed)`` from one row of a region CSV.

    Grid regions are regenerated from their floors and level data.
    """
    import numpy as np

    from .conformal import BoxRegion
    from .exceptions import ParseError
    from .hdr import FloorPolytope, LevelData, interior_grid, LevelSetGrid

    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ParseError(f"{path}: no region rows")
    if not 0 <= row < len(rows):
        raise ParseError(f"{path}: row {row} out of range (0..{len(rows) - 1})")
    r = rows[row]
    D = sum(1 for k in r if k.startswith("mu_"))

    def vec(prefix):
        vals = [r[f"{prefix}_{j}"] for j in range(1, D + 1)]
        return np.array([float(v) for v in vals]) if all(vals) else None

    try:
        mean = vec("mu")
        y = vec("y")
        method = r["method"]
        if method == "QR":
            region = BoxRegion(vec("lo"), vec("hi"))
        else:
            w = vec("w")
            level = LevelData(float(r["t_star"]), w, float(w.sum()), float(r["q"]))
            floor = FloorPolytope(vec("tau"), level)
            if method == "HDR-floor":
                region = floor
            else:
                m = int(r["grid_m"])
                pts = interior_grid(floor, m)
                region = LevelSetGrid(pts[level.satisfied(pts)], floor, m)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: row {row}: malformed region ({exc})") from exc
    return region, mean, y
