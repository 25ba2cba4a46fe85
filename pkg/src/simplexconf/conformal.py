"""Split-conformal scaffolding and the quantile-residual box method.

The box method scores a point by the largest absolute normal quantile
residual across parts, each residual coming from the marginal Beta law of
that part.  Inverting the calibrated threshold gives one closed interval
per part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .dirichlet import MeanPrecision, as_composition
from .exceptions import DomainError
from .hdr import FloorPolytope, LevelSetGrid
from .numerics import beta_cdf, beta_quantile, normal_cdf, normal_quantile

__all__ = [
    "SplitIndices",
    "ConformalQuantile",
    "BoxRegion",
    "PredictionRegion",
    "split_data",
    "conformal_quantile",
    "pit_values",
    "qr_score",
    "qr_region",
    "whole_box",
    "region_contains",
    "region_widths",
]

PIT_EPS = 1e-12


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    calibration: np.ndarray
    test: np.ndarray
    seed: int


def split_data(n: int, fractions=(0.7, 0.3, 0.0), seed: int = 0) -> SplitIndices:
    """Uniformly random disjoint train/calibration/test partition of ``range(n)``.

    Block sizes are ``round(f * n)`` for train and calibration; the test block
    takes the remainder.  Zero fractions give empty blocks.
    """
    fr = np.asarray(fractions, dtype=float)
    if fr.shape != (3,) or np.any(fr < 0) or not math.isclose(fr.sum(), 1.0, abs_tol=1e-9):
        raise DomainError(f"fractions must be three non-negative numbers summing to 1, got {fractions}")
    n_train = int(round(fr[0] * n))
    n_cal = int(round(fr[1] * n))
    n_test = n - n_train - n_cal
    sizes = (n_train, n_cal, n_test)
    if n_test < 0 or any(s == 0 and f > 0 for s, f in zip(sizes, fr)):
        raise DomainError(f"n={n} is too small for fractions {tuple(fr)}")
    perm = np.random.default_rng(seed).permutation(n)
    return SplitIndices(
        np.sort(perm[:n_train]),
        np.sort(perm[n_train:n_train + n_cal]),
        np.sort(perm[n_train + n_cal:]),
        seed,
    )


@dataclass(frozen=True)
class ConformalQuantile:
    """Calibrated threshold; ``value`` is ``inf`` when ``k > n_cal``."""

    value: float
    k: int
    n_cal: int
    alpha: float

    @property
    def is_infinite(self) -> bool:
        return self.k > self.n_cal


def conformal_quantile(scores, alpha: float) -> ConformalQuantile:
    """The ``ceil((1 - alpha)(n_cal + 1))``-th smallest calibration score."""
    scores = np.asarray(scores, dtype=float).ravel()
    if scores.size == 0:
        raise DomainError("no calibration scores")
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if not np.all(np.isfinite(scores)):
        raise DomainError("calibration scores must be finite")
    n = scores.size
    # tiny guard so that e.g. 0.9 * 10 does not round up to 10
    k = math.ceil((1 - alpha) * (n + 1) - 1e-9)
    if k > n:
        return ConformalQuantile(math.inf, k, n, alpha)
    return ConformalQuantile(float(np.partition(scores, k - 1)[k - 1]), k, n, alpha)


def _beta_params(mp: MeanPrecision):
    a = mp.lam
    return a, mp.phi[..., None] - a


def pit_values(y, mp: MeanPrecision):
    """Marginal Beta CDF of each part, clamped into ``[1e-12, 1 - 1e-12]``."""
    y = as_composition(y, strict=False)
    a, b = _beta_params(mp)
    u = beta_cdf(np.clip(y, 0.0, 1.0), a, b)
    return np.clip(u, PIT_EPS, 1.0 - PIT_EPS)


def qr_score(y, mp: MeanPrecision):
    """Largest absolute quantile residual over the parts."""
    z = np.abs(normal_quantile(pit_values(y, mp)))
    out = z.max(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BoxRegion:
    """One closed interval ``[lo_j, hi_j]`` per part."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise DomainError("box needs lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def D(self) -> int:
        return self.lo.shape[-1]

    def contains(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.all((y >= self.lo) & (y <= self.hi)))

    def widths(self) -> np.ndarray:
        return self.hi - self.lo


PredictionRegion = Union[BoxRegion, FloorPolytope, LevelSetGrid]


def whole_box(D: int) -> BoxRegion:
    return BoxRegion(np.zeros(D), np.ones(D))


def qr_region(mp: MeanPrecision, q) -> BoxRegion:
    """Invert the max-residual score at threshold ``q`` for a single law."""
    qv = q.value if isinstance(q, ConformalQuantile) else float(q)
    if math.isinf(qv):
        return whole_box(mp.D)
    if qv < 0:
        raise DomainError("threshold must be non-negative")
    a, b = _beta_params(mp)
    lo = beta_quantile(np.full(mp.D, normal_cdf(-qv)), a, b)
    hi = beta_quantile(np.full(mp.D, normal_cdf(qv)), a, b)
    return BoxRegion(lo, np.maximum(hi, lo))


def region_contains(region: PredictionRegion, y) -> bool:
    """Membership test; level-set regions use the exact density constraint."""
    return region.contains(y)


def region_widths(region: PredictionRegion) -> np.ndarray:
    """Per-part width of a region (see each region type)."""
    return region.widths()
