"""Dirichlet distribution in shape and mean-precision form.

``MeanPrecision`` may describe a single law (``mu`` of shape ``(D,)``,
scalar ``phi``) or a batch of laws (``mu`` of shape ``(n, D)``, ``phi`` of
shape ``(n,)``).  Compositions are plain float arrays whose last axis holds
the parts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .numerics import log_gamma

__all__ = [
    "ShapeParams",
    "MeanPrecision",
    "as_composition",
    "to_shape",
    "to_mean_precision",
    "log_density",
    "component_moments",
    "marginal_beta",
    "sample",
]

SUM_TOL = 1e-9
SAMPLE_RETRIES = 16


def as_composition(y, strict=True) -> np.ndarray:
    """Validate ``y`` as (a batch of) points of the open simplex.

    With ``strict=False`` only the sum and the shape are checked, so that
    boundary points can be passed on to code that clamps them itself.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 0 or y.shape[-1] < 2:
        raise DomainError("a composition needs at least two parts")
    if not np.all(np.isfinite(y)):
        raise DomainError("composition parts must be finite")
    if np.any(np.abs(y.sum(axis=-1) - 1.0) > SUM_TOL):
        raise DomainError("composition parts must sum to 1")
    if strict and np.any(y <= 0):
        raise DomainError("composition parts must be strictly positive")
    return y


@dataclass(frozen=True)
class ShapeParams:
    """Dirichlet shape parameters ``lambda`` (last axis = parts)."""

    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.ndim == 0 or lam.shape[-1] < 2:
            raise DomainError("need at least two shape parameters")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            raise DomainError("shape parameters must be finite and > 0")
        object.__setattr__(self, "lam", lam)

    @property
    def lambda0(self):
        return self.lam.sum(axis=-1)

    @property
    def D(self) -> int:
        return self.lam.shape[-1]


@dataclass(frozen=True)
class MeanPrecision:
    """Dirichlet law as component means ``mu`` and precision ``phi``."""

    mu: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if mu.ndim == 0 or mu.shape[-1] < 2:
            raise DomainError("need at least two component means")
        if phi.shape != mu.shape[:-1]:
            raise DomainError(f"phi shape {phi.shape} does not match mu {mu.shape}")
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0) or np.any(mu >= 1):
            raise DomainError("component means must lie in (0, 1)")
        if np.any(np.abs(mu.sum(axis=-1) - 1.0) > SUM_TOL):
            raise DomainError("component means must sum to 1")
        if not np.all(np.isfinite(phi)) or np.any(phi <= 0):
            raise DomainError("precision must be finite and > 0")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "phi", phi)

    @property
    def D(self) -> int:
        return self.mu.shape[-1]

    @property
    def lam(self) -> np.ndarray:
        return self.mu * self.phi[..., None]

    def __len__(self):
        if self.mu.ndim == 1:
            raise TypeError("single MeanPrecision has no length")
        return self.mu.shape[0]

    def __getitem__(self, idx):
        """Select laws from a batch."""
        return MeanPrecision(self.mu[idx], self.phi[idx])

    def permuted(self, perm):
        return MeanPrecision(self.mu[..., perm], self.phi)


def to_shape(mp: MeanPrecision) -> ShapeParams:
    return ShapeParams(mp.lam)


def to_mean_precision(sp: ShapeParams) -> MeanPrecision:
    phi = sp.lambda0
    return MeanPrecision(sp.lam / phi[..., None], phi)


def _log_norm_const(mp: MeanPrecision):
    return np.asarray(log_gamma(mp.phi)) - np.sum(log_gamma(mp.lam), axis=-1)


def log_density(y, mp: MeanPrecision):
    """Log Dirichlet density at interior point(s) ``y``.

    Boundary points raise :class:`DomainError`; callers decide how to clamp.
    """
    y = as_composition(y)
    if y.shape[-1] != mp.D:
        raise DomainError(f"composition has {y.shape[-1]} parts, law has {mp.D}")
    out = _log_norm_const(mp) + np.sum((mp.lam - 1.0) * np.log(y), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def component_moments(mp: MeanPrecision, j: int):
    """Mean and variance of part ``j`` (zero-based)."""
    mu_j = mp.mu[..., j]
    return mu_j, mu_j * (1.0 - mu_j) / (mp.phi + 1.0)


def marginal_beta(mp: MeanPrecision, j: int):
    """Beta parameters ``(a, b)`` of the marginal law of part ``j``."""
    mu_j = mp.mu[..., j]
    return mp.phi * mu_j, mp.phi * (1.0 - mu_j)


def sample(mp: MeanPrecision, rng: np.random.Generator) -> np.ndarray:
    """Draw one composition per law in ``mp`` by normalizing Gamma variates.

    Draws where a part underflows to exactly zero are redrawn a bounded
    number of times, after which zeros are replaced by 1e-300.
    """
    lam = mp.lam
    g = rng.gamma(lam)
    bad = np.any(g <= 0, axis=-1)
    for _ in range(SAMPLE_RETRIES):
        if not np.any(bad):
            break
        if g.ndim == 1:
            g = rng.gamma(lam)
        else:
            g[bad] = rng.gamma(lam[bad])
        bad = np.any(g <= 0, axis=-1)
    g = np.maximum(g, 1e-300)
    return g / g.sum(axis=-1, keepdims=True)
