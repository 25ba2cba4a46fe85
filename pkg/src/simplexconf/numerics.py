"""Special functions, distribution primitives and a bracketed root finder.

The special functions are thin, domain-checked wrappers around
:mod:`scipy.special`; they accept scalars or arrays and return the same
kind.  Everything here is pure and safe to call from several workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special

from .exceptions import BracketError, ConvergenceError, DomainError

__all__ = [
    "Bracket",
    "log_gamma",
    "digamma",
    "beta_cdf",
    "beta_quantile",
    "normal_cdf",
    "normal_quantile",
    "find_root",
]

DEFAULT_ROOT_TOL = 1e-10
DEFAULT_ROOT_MAXITER = 200


def _unwrap(x):
    # hand back Python floats for scalar input
    return float(x) if np.ndim(x) == 0 else x


def _positive(name, x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError(f"{name} must be finite and > 0")
    return x


def _probability(name, p):
    p = np.asarray(p, dtype=float)
    if np.any(np.isnan(p)) or np.any(p < 0) or np.any(p > 1):
        raise DomainError(f"{name} must lie in [0, 1]")
    return p


def log_gamma(x):
    """Natural logarithm of the Gamma function for ``x > 0``."""
    return _unwrap(special.gammaln(_positive("x", x)))


def digamma(x):
    """Logarithmic derivative of the Gamma function for ``x > 0``."""
    return _unwrap(special.psi(_positive("x", x)))


def beta_cdf(y, a, b):
    """Regularized incomplete beta function :math:`I_y(a, b)`.

    Parameters
    ----------
    y : float or ndarray
        Evaluation point(s) in ``[0, 1]``.
    a, b : float or ndarray
        Positive shape parameters; broadcast against ``y``.
    """
    y = _probability("y", y)
    return _unwrap(special.betainc(_positive("a", a), _positive("b", b), y))


def beta_quantile(p, a, b):
    """Inverse of :func:`beta_cdf` in its first argument.

    Returns exactly 0 at ``p = 0`` and exactly 1 at ``p = 1``.
    """
    p = _probability("p", p)
    y = special.betaincinv(_positive("a", a), _positive("b", b), p)
    y = np.where(p == 0.0, 0.0, np.where(p == 1.0, 1.0, y))
    return _unwrap(y)


def normal_cdf(z):
    """Standard normal CDF."""
    z = np.asarray(z, dtype=float)
    if np.any(np.isnan(z)):
        raise DomainError("z must not be NaN")
    return _unwrap(special.ndtr(z))


def normal_quantile(p):
    """Standard normal quantile; ``-inf`` at 0 and ``+inf`` at 1."""
    return _unwrap(special.ndtri(_probability("p", p)))


@dataclass(frozen=True)
class Bracket:
    """Closed search interval ``[lo, hi]`` with ``lo < hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or not self.lo < self.hi:
            raise BracketError(f"invalid bracket [{self.lo}, {self.hi}]")


def find_root(
    objective: Callable[[float], float],
    bracket: Bracket,
    tol: float = DEFAULT_ROOT_TOL,
    max_iter: int = DEFAULT_ROOT_MAXITER,
) -> float:
    """Locate a sign change of ``objective`` inside ``bracket`` (Brent's method).

    Raises
    ------
    BracketError
        If the objective has the same sign at both ends.
    ConvergenceError
        If ``max_iter`` iterations were not enough.
    """
    f_lo = objective(bracket.lo)
    f_hi = objective(bracket.hi)
    if f_lo == 0.0:
        return float(bracket.lo)
    if f_hi == 0.0:
        return float(bracket.hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(
            f"no sign change on [{bracket.lo}, {bracket.hi}]: f = ({f_lo}, {f_hi})"
        )
    root, info = optimize.brentq(
        objective,
        bracket.lo,
        bracket.hi,
        xtol=tol,
        maxiter=max_iter,
        full_output=True,
        disp=False,
    )
    if not info.converged:
        raise ConvergenceError(
            f"root finder did not converge in {max_iter} iterations ({info.flag})"
        )
    return float(root)
