"""Logistic Dirichlet regression.

Means use a multinomial-logit link with part 1 as the fixed reference,
``log(mu_j / mu_1) = x @ beta_j`` for ``j >= 2``; the precision uses a log
link, ``log(phi) = z @ gamma``.  Design matrices carry their intercept
column explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import special

from .dirichlet import MeanPrecision, as_composition
from .exceptions import DomainError, FitError, RankError

__all__ = [
    "Coefficients",
    "Standardization",
    "Dataset",
    "FitConfig",
    "Convergence",
    "FittedModel",
    "softmax",
    "linear_predictors",
    "negative_log_likelihood",
    "nll_gradient",
    "initial_coefficients",
    "fit_mle",
    "predict_params",
]

MAX_LOG_PHI = 700.0


@dataclass(frozen=True)
class Coefficients:
    """Mean coefficients ``beta`` (``(D-1, p)``) and precision ``gamma`` (``(p_phi,)``)."""

    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        beta = np.atleast_2d(np.asarray(self.beta, dtype=float))
        gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        if gamma.ndim != 1:
            raise DomainError("gamma must be a vector")
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(gamma))):
            raise DomainError("coefficients must be finite")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)

    @property
    def D(self) -> int:
        return self.beta.shape[0] + 1

    @property
    def n_params(self) -> int:
        return self.beta.size + self.gamma.size

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.beta.ravel(), self.gamma])

    @classmethod
    def from_flat(cls, theta, D, p, p_phi):
        theta = np.asarray(theta, dtype=float)
        if theta.size != (D - 1) * p + p_phi:
            raise DomainError("parameter vector has the wrong length")
        nb = (D - 1) * p
        return cls(theta[:nb].reshape(D - 1, p), theta[nb:])

    @classmethod
    def zeros(cls, D, p, p_phi):
        return cls(np.zeros((D - 1, p)), np.zeros(p_phi))


@dataclass(frozen=True)
class Standardization:
    """Per-column centering and scaling for both design matrices.

    Intercept columns carry mean 0 and scale 1 so they pass through.
    """

    x_mean: np.ndarray
    x_scale: np.ndarray
    z_mean: np.ndarray
    z_scale: np.ndarray

    def apply(self, X, Z):
        X = (np.asarray(X, dtype=float) - self.x_mean) / self.x_scale
        Z = (np.asarray(Z, dtype=float) - self.z_mean) / self.z_scale
        return X, Z

    @classmethod
    def fit(cls, X, Z, x_mask=None, z_mask=None):
        """Estimate means and standard deviations column by column.

        Columns where the mask is False (and constant columns) are left alone.
        """

        def stats(M, mask):
            M = np.asarray(M, dtype=float)
            mean = M.mean(axis=0)
            sd = M.std(axis=0, ddof=1) if M.shape[0] > 1 else np.zeros(M.shape[1])
            keep = sd > 0
            if mask is not None:
                keep &= np.asarray(mask, dtype=bool)
            return np.where(keep, mean, 0.0), np.where(keep, sd, 1.0)

        xm, xs = stats(X, x_mask)
        zm, zs = stats(Z, z_mask)
        return cls(xm, xs, zm, zs)


@dataclass(frozen=True)
class Dataset:
    """Raw covariates (with intercepts) and interior compositional responses."""

    X: np.ndarray
    Z: np.ndarray
    Y: np.ndarray
    standardization: Optional[Standardization] = None
    x_names: tuple = ()
    z_names: tuple = ()
    y_names: tuple = ()

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        if not (X.shape[0] == Z.shape[0] == Y.shape[0]):
            raise DomainError("X, Z and Y must have the same number of rows")
        if Y.shape[0]:
            as_composition(Y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "Y", Y)

    def __len__(self):
        return self.Y.shape[0]

    @property
    def D(self) -> int:
        return self.Y.shape[1]

    def subset(self, idx) -> "Dataset":
        return replace(self, X=self.X[idx], Z=self.Z[idx], Y=self.Y[idx])

    def design(self):
        """Covariates after the stored standardization, if any."""
        if self.standardization is None:
            return self.X, self.Z
        return self.standardization.apply(self.X, self.Z)


def softmax(eta):
    eta = np.asarray(eta, dtype=float)
    e = np.exp(eta - eta.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _predictors(X, Z, coeffs):
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if X.shape[-1] != coeffs.beta.shape[1] or Z.shape[-1] != coeffs.gamma.size:
        raise DomainError(
            f"design widths ({X.shape[-1]}, {Z.shape[-1]}) do not match "
            f"coefficients ({coeffs.beta.shape[1]}, {coeffs.gamma.size})"
        )
    eta = X @ coeffs.beta.T
    eta = np.concatenate([np.zeros(eta.shape[:-1] + (1,)), eta], axis=-1)
    log_phi = Z @ coeffs.gamma
    if np.any(np.abs(log_phi) > MAX_LOG_PHI):
        raise OverflowError("log precision outside [-700, 700]")
    return softmax(eta), np.exp(log_phi)


def linear_predictors(X, Z, coeffs: Coefficients) -> MeanPrecision:
    """Map covariate row(s) to Dirichlet means and precisions."""
    mu, phi = _predictors(X, Z, coeffs)
    return MeanPrecision(mu, phi)


def _nll_terms(X, Z, logY, coeffs, with_grad):
    mu, phi = _predictors(X, Z, coeffs)
    lam = mu * phi[:, None]
    ll = special.gammaln(phi) - special.gammaln(lam).sum(1) + ((lam - 1.0) * logY).sum(1)
    nll = -np.sum(ll)
    if not with_grad:
        return nll, None
    a = logY - special.psi(lam)
    abar = (mu * a).sum(1)
    d_eta = phi[:, None] * mu * (a - abar[:, None])
    d_logphi = phi * (special.psi(phi) + abar)
    g_beta = -(d_eta[:, 1:].T @ X)
    g_gamma = -(Z.T @ d_logphi)
    return nll, np.concatenate([g_beta.ravel(), g_gamma])


def _log_responses(Y):
    return np.log(as_composition(Y))


def negative_log_likelihood(X, Z, Y, coeffs: Coefficients) -> float:
    """Negative Dirichlet log-likelihood summed over the rows."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] == 0:
        return 0.0
    return float(_nll_terms(np.atleast_2d(X), np.atleast_2d(Z), _log_responses(Y), coeffs, False)[0])


def nll_gradient(X, Z, Y, coeffs: Coefficients) -> np.ndarray:
    """Gradient of :func:`negative_log_likelihood` in flattened ``(beta, gamma)`` order."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] == 0:
        return np.zeros(coeffs.n_params)
    return _nll_terms(np.atleast_2d(X), np.atleast_2d(Z), _log_responses(Y), coeffs, True)[1]


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 500
    gtol: float = 1e-6
    armijo_c: float = 1e-4
    max_backtracks: int = 60


@dataclass(frozen=True)
class Convergence:
    iterations: int
    grad_norm: float
    nll: float
    converged: bool
    initial_nll: float = float("nan")


@dataclass(frozen=True)
class FittedModel:
    coefficients: Coefficients
    D: int
    convergence: Convergence
    standardization: Optional[Standardization] = None
    metadata: dict = field(default_factory=dict, compare=False)


def initial_coefficients(X, Z, Y) -> Coefficients:
    """Data-driven starting point for the optimizer.

    Mean intercepts are the log-ratios of the sample component means to
    part 1; the precision intercept is the log of a moment estimate
    ``median_j[m_j (1 - m_j) / v_j - 1]``.  Slopes start at zero.
    """
    D = Y.shape[1]
    coeffs = Coefficients.zeros(D, X.shape[1], Z.shape[1])
    m = Y.mean(axis=0)
    v = Y.var(axis=0, ddof=1) if Y.shape[0] > 1 else np.zeros(D)
    beta = coeffs.beta.copy()
    gamma = coeffs.gamma.copy()
    beta[:, 0] = np.log(m[1:] / m[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        phi0 = float(np.median(m * (1 - m) / v - 1.0))
    if not np.isfinite(phi0) or phi0 <= 0:
        phi0 = 1.0
    gamma[0] = np.log(phi0)
    return Coefficients(beta, gamma)


def _check_rank(M, name):
    if np.linalg.matrix_rank(M) < M.shape[1]:
        raise RankError(f"{name} design matrix is rank deficient")


def fit_mle(train: Dataset, config: Optional[FitConfig] = None) -> FittedModel:
    """Maximum-likelihood fit by BFGS with Armijo backtracking.

    The first column of each design matrix is assumed to be the intercept.
    Deterministic for fixed data and configuration.

    Raises
    ------
    RankError
        If either design matrix is rank deficient.
    FitError
        If the gradient norm does not drop below ``config.gtol`` within
        ``config.max_iter`` iterations.
    """
    config = config or FitConfig()
    X, Z = train.design()
    Y = train.Y
    D, p, p_phi = Y.shape[1], X.shape[1], Z.shape[1]
    if len(train) <= p + p_phi:
        raise FitError(f"need more than {p + p_phi} observations, got {len(train)}")
    _check_rank(X, "mean")
    _check_rank(Z, "precision")
    logY = np.log(Y)

    def evaluate(theta, with_grad=True):
        try:
            with np.errstate(all="ignore"):
                f, g = _nll_terms(X, Z, logY, Coefficients.from_flat(theta, D, p, p_phi), with_grad)
        except (OverflowError, DomainError, FloatingPointError):
            return np.inf, None
        if not np.isfinite(f) or (g is not None and not np.all(np.isfinite(g))):
            return np.inf, None
        return f, g

    theta = initial_coefficients(X, Z, Y).flatten()
    f, g = evaluate(theta)
    if not np.isfinite(f):
        raise FitError("non-finite likelihood at the starting point")
    f_init = f
    H = np.eye(theta.size)
    scaled = False
    it = 0
    gnorm = float(np.linalg.norm(g))
    while gnorm > config.gtol and it < config.max_iter:
        it += 1
        step = -H @ g
        slope = float(g @ step)
        if slope >= 0:
            H = np.eye(theta.size)
            step, slope = -g, -float(g @ g)
        # rounding slack so the search does not stall at the noise floor of f
        slack = 64 * np.finfo(float).eps * (1.0 + abs(f))
        t = 1.0
        for _ in range(config.max_backtracks):
            f_new, g_new = evaluate(theta + t * step)
            if np.isfinite(f_new) and f_new <= f + config.armijo_c * t * slope + slack:
                break
            t *= 0.5
        else:
            break
        s = t * step
        yv = g_new - g
        sy = float(s @ yv)
        theta, f, g = theta + s, f_new, g_new
        gnorm = float(np.linalg.norm(g))
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(yv)):
            if not scaled:
                H = np.eye(theta.size) * (sy / float(yv @ yv))
                scaled = True
            rho = 1.0 / sy
            Hy = H @ yv
            H = H + ((sy + yv @ Hy) * rho * rho) * np.outer(s, s) - rho * (
                np.outer(Hy, s) + np.outer(s, Hy)
            )
    conv = Convergence(it, gnorm, float(f), gnorm <= config.gtol, float(f_init))
    if not conv.converged:
        raise FitError(
            f"BFGS stopped after {it} iterations with gradient norm {gnorm:.3g}",
            diagnostics=conv,
        )
    return FittedModel(
        Coefficients.from_flat(theta, D, p, p_phi),
        D,
        conv,
        train.standardization,
        {"x_names": list(train.x_names), "z_names": list(train.z_names),
         "y_names": list(train.y_names)},
    )


def predict_params(model: FittedModel, X, Z) -> MeanPrecision:
    """Predicted Dirichlet law(s) at raw covariate row(s).

    The model's stored standardization is applied before the linear
    predictors are formed.
    """
    if model.standardization is not None:
        X, Z = model.standardization.apply(X, Z)
    return linear_predictors(X, Z, model.coefficients)
