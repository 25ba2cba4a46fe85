"""Density-based conformal sets on the simplex.

The score is the negative log Dirichlet density.  Its sublevel set at a
threshold ``q`` is ``{y : sum_j w_j log y_j >= t_star}`` with
``w_j = phi mu_j - 1``; when every ``w_j > 0`` that set is convex.  Two
tractable stand-ins are built here:

* the coordinate-floor polytope ``{y : y_i >= tau_i}``, where ``tau_i`` is the
  smallest value of ``y_i`` on the level set, obtained from the KKT system
  of the minimisation through a single scalar root in ``rho``;
* a barycentric lattice inside that polytope, filtered by the exact level
  constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dirichlet import MeanPrecision, as_composition, log_density
from .exceptions import BracketError, ConvergenceError, DomainError
from .numerics import Bracket, find_root, log_gamma

__all__ = [
    "LevelData",
    "FloorPolytope",
    "LevelSetGrid",
    "nll_score",
    "level_threshold",
    "floor_equation",
    "solve_floor",
    "floor_polytope",
    "lattice",
    "interior_grid",
    "grid_region",
]

GRID_NUDGE = 1e-12
BRACKET_START = (0.1, 10.0)
BRACKET_FACTOR = 10.0
BRACKET_EXPANSIONS = 30


@dataclass(frozen=True)
class LevelData:
    """Level-set description of ``{nll_score <= q}`` for one law."""

    t_star: float
    w: np.ndarray
    W: float
    q: float

    def satisfied(self, y):
        """Evaluate ``sum_j w_j log y_j >= t_star`` row-wise."""
        if math.isinf(self.t_star) and self.t_star < 0:
            return np.ones(np.shape(y)[:-1], dtype=bool)
        return np.log(y) @ self.w >= self.t_star


@dataclass(frozen=True)
class FloorPolytope:
    """``{y in simplex : y_i >= tau_i}``; ``fallback[i]`` marks a zero floor
    that came from the fallback rule rather than the root solve."""

    tau: np.ndarray
    level: LevelData
    fallback: tuple = ()

    @property
    def D(self) -> int:
        return self.tau.size

    def contains(self, y) -> bool:
        return bool(np.all(np.asarray(y, dtype=float) >= self.tau))

    def widths(self) -> np.ndarray:
        # marginal range of y_j over the polytope is [tau_j, 1 - sum_{t != j} tau_t]
        return np.full(self.D, 1.0 - self.tau.sum())


@dataclass(frozen=True)
class LevelSetGrid:
    """Lattice points of a floor polytope that satisfy the level constraint.

    Membership is decided by the exact level constraint, not by the grid.
    """

    accepted: np.ndarray
    floor: FloorPolytope
    points_per_axis: int

    @property
    def level(self) -> LevelData:
        return self.floor.level

    @property
    def D(self) -> int:
        return self.floor.D

    def contains(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        if np.any(y <= 0):
            return False
        return bool(self.level.satisfied(y))

    def widths(self) -> np.ndarray:
        if self.accepted.shape[0] == 0:
            return np.zeros(self.D)
        return self.accepted.max(axis=0) - self.accepted.min(axis=0)


def nll_score(y, mp: MeanPrecision):
    """Negative log density; larger means less conforming."""
    out = -np.asarray(log_density(y, mp))
    return float(out) if out.ndim == 0 else out


def level_threshold(mp: MeanPrecision, q: float) -> LevelData:
    """Rewrite ``nll_score(y) <= q`` as ``sum_j w_j log y_j >= t_star``.

    An infinite ``q`` gives ``t_star = -inf`` (every point qualifies).
    """
    if mp.mu.ndim != 1:
        raise DomainError("level_threshold expects a single law")
    q = float(q)
    if math.isnan(q) or q == -math.inf:
        raise DomainError("threshold must be a number or +inf")
    lam = mp.lam
    w = lam - 1.0
    t_star = -q - log_gamma(float(mp.phi)) + float(np.sum(log_gamma(lam)))
    return LevelData(t_star, w, float(w.sum()), q)


def _check_floor_args(w, i):
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("floor equation needs every w_j > 0")
    if not 0 <= i < w.size:
        raise DomainError(f"index {i} out of range")
    return w


def _floor_residual(log_rho, w, W, c, i):
    # F_i(rho) - t_star written as its rho -> inf limit ``c`` plus two log1p
    # terms; both stay accurate when the increments of F fall near one ulp
    rho = math.exp(log_rho)
    wi, rest = w[i], W - w[i]
    return c - wi * math.log1p(rest / (W * rho)) - rest * math.log1p(-wi / (W * (1.0 + rho)))


def _floor_constant(w, W, t_star):
    return float(w @ np.log(w / W)) - t_star


def floor_equation(rho, w, W, t_star, i) -> float:
    """Residual ``F_i(rho) - t_star`` of the scalar KKT equation for face ``i``.

    ``F_i(rho) = w_i log rho + (W - w_i) log(1 + rho)
    - W log(w_i rho + (W - w_i)(1 + rho)) + sum_j w_j log w_j``.
    Strictly increasing in ``rho`` when every ``w_j > 0``.
    """
    w = _check_floor_args(w, i)
    if not rho > 0:
        raise DomainError("rho must be > 0")
    return _floor_residual(math.log(rho), w, float(W), _floor_constant(w, float(W), float(t_star)), i)


def _tau_from_rho(rho, w, W, i):
    # theta w_i / (1 + rho) with theta = 1 / (w_i / (1 + rho) + (W - w_i) / rho)
    return w[i] * rho / (w[i] * rho + (W - w[i]) * (1.0 + rho))


def _solve_floor(level: LevelData, i: int):
    """Return ``(tau_i, rho, fell_back)``."""
    w = level.w
    if math.isinf(level.t_star) or np.any(w <= 0):
        return 0.0, math.nan, True
    W = level.W
    c = _floor_constant(w, W, level.t_star)

    def g(u):
        return _floor_residual(u, w, W, c, i)

    lo, hi = (math.log(b) for b in BRACKET_START)
    step = math.log(BRACKET_FACTOR)
    for _ in range(BRACKET_EXPANSIONS):
        if g(lo) <= 0:
            break
        lo -= step
    for _ in range(BRACKET_EXPANSIONS):
        if g(hi) >= 0:
            break
        hi += step
    try:
        u = find_root(g, Bracket(lo, hi))
    except (BracketError, ConvergenceError):
        return 0.0, math.nan, True
    rho = math.exp(u)
    return _tau_from_rho(rho, w, W, i), rho, False


def solve_floor(level: LevelData, i: int) -> float:
    """Smallest ``y_i`` on the level set (0 under the fallback rule).

    The fallback applies when some ``w_j <= 0`` or no bracket for the root
    is found within 30 decades on either side of ``rho = 1``.
    """
    return _solve_floor(level, i)[0]


def floor_polytope(mp: MeanPrecision, q) -> FloorPolytope:
    """Coordinate-floor polytope containing the level set at threshold ``q``."""
    qv = getattr(q, "value", q)
    if math.isinf(qv):
        w = mp.lam - 1.0
        level = LevelData(-math.inf, w, float(w.sum()), math.inf)
        return FloorPolytope(np.zeros(mp.D), level, (True,) * mp.D)
    level = level_threshold(mp, qv)
    sols = [_solve_floor(level, i) for i in range(mp.D)]
    tau = np.array([s[0] for s in sols])
    total = tau.sum()
    if total >= 1.0:
        # exact floors always sum below 1; only reachable through rounding
        tau = tau * (1.0 - 1e-12) / total
    return FloorPolytope(tau, level, tuple(s[2] for s in sols))


@lru_cache(maxsize=32)
def _lattice_indices(D: int, m: int) -> np.ndarray:
    steps = m - 1
    axes = np.indices((m,) * (D - 1)).reshape(D - 1, -1).T
    axes = axes[axes.sum(axis=1) <= steps]
    idx = np.column_stack([axes, steps - axes.sum(axis=1)])
    idx.setflags(write=False)
    return idx


def lattice(D: int, m: int) -> np.ndarray:
    """Barycentric lattice of the closed simplex with ``m`` points per edge."""
    if m < 2:
        raise DomainError("need at least two points per axis")
    if D < 2:
        raise DomainError("need at least two parts")
    return _lattice_indices(D, m) / (m - 1)


def interior_grid(floor: FloorPolytope, m: int) -> np.ndarray:
    """Lattice sweep of the floor polytope.

    Coordinate ``k`` runs from ``tau_k`` up to ``1 - sum_{j>k} tau_j -
    sum_{j<k} y_j`` in steps of ``(1 - sum(tau)) / (m - 1)``, so the first
    coordinate takes exactly ``m`` values and the last one closes the sum.
    Coordinates that land on zero are nudged to 1e-12 so logs stay finite.
    """
    tau = np.asarray(floor.tau, dtype=float)
    side = 1.0 - tau.sum()
    if side <= 0:
        raise DomainError("floors must sum to less than 1")
    pts = tau + side * lattice(tau.size, m)
    pts = np.maximum(pts, GRID_NUDGE)
    return pts / pts.sum(axis=1, keepdims=True)


def grid_region(mp: MeanPrecision, q, m: int, floor: FloorPolytope | None = None) -> LevelSetGrid:
    """Level-set grid inside the floor polytope (pass ``floor`` to reuse one)."""
    floor = floor if floor is not None else floor_polytope(mp, q)
    pts = interior_grid(floor, m)
    return LevelSetGrid(pts[floor.level.satisfied(pts)], floor, m)


def full_grid_region(mp: MeanPrecision, q, m: int) -> LevelSetGrid:
    """Level-set grid over the whole simplex, without floors."""
    qv = getattr(q, "value", q)
    if math.isinf(qv):
        w = mp.lam - 1.0
        level = LevelData(-math.inf, w, float(w.sum()), math.inf)
    else:
        level = level_threshold(mp, qv)
    whole = FloorPolytope(np.zeros(mp.D), level, (True,) * mp.D)
    pts = interior_grid(whole, m)
    return LevelSetGrid(pts[level.satisfied(pts)], whole, m)
