"""Monte Carlo coverage, width and runtime studies.

Each iteration draws a fresh data set from a scenario, splits it 70/30
into training and calibration parts, fits (or, in oracle mode, reuses the
true coefficients), calibrates every requested method and scores one fresh
test point.  Iteration ``i`` draws from ``SeedSequence([seed, i])``, so
results do not depend on how iterations are scheduled across workers.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .conformal import conformal_quantile, qr_region, qr_score, split_data
from .dirichlet import sample
from .exceptions import DomainError, FitError
from .hdr import floor_polytope, full_grid_region, grid_region, interior_grid, nll_score, FloorPolytope, LevelData
from .regression import Coefficients, Dataset, FitConfig, fit_mle, linear_predictors, predict_params

__all__ = [
    "ScenarioSpec",
    "EvalSummary",
    "METHODS",
    "SCENARIOS",
    "scenario",
    "generate_scenario",
    "run_monte_carlo",
    "full_simplex_grid",
    "compare_hdr_vs_full",
    "default_grid_m",
    "worker_count",
]

QR = "QR"
HDR_FLOOR = "HDR-floor"
HDR_GRID = "HDR-floor-grid"
SIMPLEX_GRID = "simplex-grid"
METHODS = (QR, HDR_FLOOR, HDR_GRID, SIMPLEX_GRID)

COVARIATE_LAWS = ("uniform", "bernoulli", "gamma")
MAX_FAILURE_RATE = 0.01


@dataclass(frozen=True)
class ScenarioSpec:
    """Data-generating design: shared covariates for means and precision."""

    id: str
    D: int
    n: int
    coefficients: Coefficients
    covariate_laws: tuple = ("uniform", "uniform")
    seed: int = 0

    def __post_init__(self):
        c = self.coefficients
        k = len(self.covariate_laws) + 1
        if c.D != self.D or c.beta.shape[1] != k or c.gamma.size != k:
            raise DomainError(f"coefficients do not match a {self.D}-part design with {k} columns")
        bad = set(self.covariate_laws) - set(COVARIATE_LAWS)
        if bad:
            raise DomainError(f"unknown covariate law(s) {sorted(bad)}")


@dataclass(frozen=True)
class EvalSummary:
    scenario: str
    method: str
    empirical_coverage: float
    mean_widths: tuple
    mean_time_seconds: float
    individual_coverage: Optional[tuple] = None
    failures: int = 0
    iterations: int = 0
    # largest within-iteration spread of the part widths (not written to CSV)
    max_width_spread: float = math.nan


def _scenario_table():
    base_beta = np.array([[-0.3, 1.0, -0.5], [-0.3, -0.5, 1.0]])
    table = {}
    for gamma1, suffix in ((3.0, "a"), (4.6, "b")):
        g = np.array([gamma1, 0.0, 0.0])
        far = base_beta.copy()
        far[:, 0] = (0.7, -0.7)
        very_far = base_beta.copy()
        very_far[:, 0] = (1.5, -1.5)
        table["1" + suffix] = (base_beta, g, ("uniform", "uniform"))
        table["2" + suffix] = (far, g, ("uniform", "uniform"))
        table["3" + suffix] = (very_far, g, ("uniform", "uniform"))
        table["4" + suffix] = (base_beta, g + [0.0, 0.5, -0.5], ("uniform", "uniform"))
        table["5" + suffix] = (base_beta, g, ("bernoulli", "gamma"))
    return table


SCENARIOS = _scenario_table()


def scenario(label: str, D: int = 3, n: int = 1000, seed: int = 0) -> ScenarioSpec:
    """Build a named scenario (``"1a"`` ... ``"5b"``).

    ``D = 4`` appends a fourth part whose coefficients copy the third
    part's intercept with its two slopes swapped.
    """
    if label not in SCENARIOS:
        raise DomainError(f"unknown scenario {label!r}; choose from {sorted(SCENARIOS)}")
    if D not in (3, 4):
        raise DomainError("scenarios are defined for 3 or 4 parts")
    beta, gamma, laws = SCENARIOS[label]
    if D == 4:
        extra = beta[1, [0, 2, 1]]
        beta = np.vstack([beta, extra])
    tag = label if D == 3 else f"{label}-D4"
    return ScenarioSpec(tag, D, n, Coefficients(beta, gamma), laws, seed)


def _draw_covariates(laws, n, rng):
    cols = [np.ones(n)]
    for law in laws:
        if law == "uniform":
            cols.append(rng.uniform(size=n))
        elif law == "bernoulli":
            cols.append((rng.uniform(size=n) < 0.5).astype(float))
        else:
            # shape 3, rate 6: mean 1/2 and variance 1/12, like U(0, 1)
            cols.append(rng.gamma(3.0, 1.0 / 6.0, size=n))
    return np.column_stack(cols)


def generate_scenario(spec: ScenarioSpec, rng=None, n: Optional[int] = None) -> Dataset:
    """Draw ``n`` (default ``spec.n``) observations from the scenario."""
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    n = spec.n if n is None else n
    X = _draw_covariates(spec.covariate_laws, n, rng)
    Y = sample(linear_predictors(X, X, spec.coefficients), rng)
    names = tuple(["(intercept)"] + [f"x{k}" for k in range(1, X.shape[1])])
    return Dataset(X, X.copy(), Y, None, names, names, tuple(f"y{j + 1}" for j in range(spec.D)))


def default_grid_m(D: int, full: bool = False) -> int:
    """Points per axis: 100 (D=3) / 20 (D=4) inside the floors, 200 / 100 over the simplex."""
    if full:
        return 200 if D == 3 else 100
    return 100 if D == 3 else 20


def full_simplex_grid(D: int, m: int) -> np.ndarray:
    """Lattice over the whole simplex (``interior_grid`` with zero floors)."""
    w = np.zeros(D)
    whole = FloorPolytope(np.zeros(D), LevelData(-math.inf, w, 0.0, math.inf))
    return interior_grid(whole, m)


def worker_count() -> int:
    env = os.environ.get("SIMPLEXCONF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"SIMPLEXCONF_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def evaluate_methods(methods, mp_cal, y_cal, mp_test, y_test, alpha, grid_m, full_grid_m):
    """Calibrate each method and judge the test point(s).

    Returns ``{method: (covered, part_covered, widths, seconds)}`` with one
    row per test point; ``part_covered`` is ``None`` except for QR.  Timing
    covers scoring the calibration set, the quantile and every test region.
    """
    n_test = y_test.shape[0]
    out = {}
    for method in methods:
        t0 = time.perf_counter()
        covered = np.zeros(n_test, dtype=bool)
        widths = np.zeros((n_test, y_test.shape[1]))
        parts = None
        if method == QR:
            q = conformal_quantile(qr_score(y_cal, mp_cal), alpha)
            parts = np.zeros_like(widths, dtype=bool)
            for t in range(n_test):
                box = qr_region(mp_test[t], q)
                parts[t] = (y_test[t] >= box.lo) & (y_test[t] <= box.hi)
                covered[t] = parts[t].all()
                widths[t] = box.widths()
        else:
            q = conformal_quantile(nll_score(y_cal, mp_cal), alpha)
            for t in range(n_test):
                if method == HDR_FLOOR:
                    region = floor_polytope(mp_test[t], q)
                elif method == HDR_GRID:
                    region = grid_region(mp_test[t], q, grid_m)
                elif method == SIMPLEX_GRID:
                    region = full_grid_region(mp_test[t], q, full_grid_m)
                else:
                    raise DomainError(f"unknown method {method!r}")
                covered[t] = region.contains(y_test[t])
                widths[t] = region.widths()
        out[method] = (covered, parts, widths, time.perf_counter() - t0)
    return out


@dataclass(frozen=True)
class _Job:
    spec: ScenarioSpec
    methods: tuple
    alpha: float
    seed: int
    grid_m: int
    full_grid_m: int
    oracle: bool
    fit_config: FitConfig = field(default_factory=FitConfig)


def _run_iteration(job: _Job, i: int):
    rng = np.random.default_rng(np.random.SeedSequence([job.seed, i]))
    data = generate_scenario(job.spec, rng)
    test = generate_scenario(job.spec, rng, n=1)
    split = split_data(len(data), (0.7, 0.3, 0.0), seed=int(rng.integers(2**63)))
    cal = data.subset(split.calibration)
    if job.oracle:
        coeffs = job.spec.coefficients
        mp_cal = linear_predictors(cal.X, cal.Z, coeffs)
        mp_test = linear_predictors(test.X, test.Z, coeffs)
    else:
        try:
            model = fit_mle(data.subset(split.train), job.fit_config)
        except FitError:
            return None
        mp_cal = predict_params(model, cal.X, cal.Z)
        mp_test = predict_params(model, test.X, test.Z)
    res = evaluate_methods(job.methods, mp_cal, cal.Y, mp_test, test.Y, job.alpha,
                           job.grid_m, job.full_grid_m)
    return {m: (bool(c[0]), None if p is None else p[0], w[0], s) for m, (c, p, w, s) in res.items()}


def _run_chunk(args):
    job, indices = args
    return [_run_iteration(job, i) for i in indices]


def _map_iterations(job, iterations, workers):
    if workers <= 1 or iterations < 2:
        return _run_chunk((job, range(iterations)))
    chunks = np.array_split(np.arange(iterations), min(iterations, workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_chunk, [(job, c.tolist()) for c in chunks])
        return [r for part in parts for r in part]


def summarize(label, methods, results, failures) -> list:
    """Average per-iteration results (``None`` entries are failures)."""
    ok = [r for r in results if r is not None]
    summaries = []
    for m in methods:
        cov = np.array([r[m][0] for r in ok], dtype=float)
        widths = np.array([r[m][2] for r in ok])
        times = np.array([r[m][3] for r in ok])
        indiv = None
        if ok and ok[0][m][1] is not None:
            indiv = tuple(float(v) for v in 100.0 * np.mean([r[m][1] for r in ok], axis=0))
        summaries.append(EvalSummary(
            label, m, float(100.0 * cov.mean()),
            tuple(float(v) for v in widths.mean(axis=0)),
            float(times.mean()), indiv, failures, len(ok),
            float(np.ptp(widths, axis=1).max()) if len(ok) else math.nan,
        ))
    return summaries


def run_monte_carlo(
    spec: ScenarioSpec,
    methods: Sequence[str] = (QR, HDR_FLOOR, HDR_GRID),
    iterations: int = 1000,
    alpha: float = 0.1,
    seed: Optional[int] = None,
    grid_m: Optional[int] = None,
    full_grid_m: Optional[int] = None,
    oracle: bool = False,
    workers: Optional[int] = None,
    fit_config: Optional[FitConfig] = None,
) -> list:
    """Run the study and return one :class:`EvalSummary` per method.

    Iterations whose fit fails are dropped and counted; more than 1% of
    failures aborts the study with :class:`FitError`.
    """
    if iterations < 1:
        raise DomainError("need at least one iteration")
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    methods = tuple(methods)
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise DomainError(f"unknown method(s) {sorted(unknown)}")
    job = _Job(
        spec, methods, alpha, spec.seed if seed is None else seed,
        grid_m or default_grid_m(spec.D), full_grid_m or default_grid_m(spec.D, full=True),
        oracle, fit_config or FitConfig(),
    )
    results = _map_iterations(job, iterations, worker_count() if workers is None else workers)
    failures = sum(r is None for r in results)
    if failures > MAX_FAILURE_RATE * iterations:
        raise FitError(f"{failures} of {iterations} fits failed in scenario {spec.id}")
    return summarize(spec.id, methods, results, failures)


def compare_hdr_vs_full(spec, iterations=100, alpha=0.1, m_hdr=None, m_full=None,
                        seed=None, workers=None) -> list:
    """Floor-restricted grid against a grid over the whole simplex, same data."""
    if spec.D not in (3, 4):
        raise DomainError("grid comparison is defined for 3 or 4 parts")
    return run_monte_carlo(spec, (HDR_GRID, SIMPLEX_GRID), iterations, alpha, seed,
                           m_hdr, m_full, workers=workers)
