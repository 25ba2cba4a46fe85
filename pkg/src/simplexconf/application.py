"""Repeated train/calibration/test evaluation on a real data set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .conformal import split_data
from .exceptions import DomainError, FitError
from .regression import Dataset, FitConfig, fit_mle, predict_params
from .simulation import HDR_FLOOR, HDR_GRID, QR, EvalSummary, default_grid_m, evaluate_methods

__all__ = ["RunConfig", "RegionRecord", "run_application", "predict_regions"]


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.1
    fractions: tuple = (0.7, 0.2, 0.1)
    repeats: int = 10
    seed: int = 0
    methods: tuple = (QR, HDR_FLOOR, HDR_GRID)
    grid_m: Optional[int] = None
    full_grid_m: Optional[int] = None
    output_dir: Optional[str] = None

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        if self.repeats < 1:
            raise DomainError("repeats must be at least 1")


def run_application(dataset: Dataset, config: RunConfig = RunConfig(), label="application",
                    fit_config: Optional[FitConfig] = None) -> list:
    """Average coverage, widths and timing over repeated random splits.

    Each repeat splits with seed ``SeedSequence([config.seed, r])``, fits on
    the training block, calibrates on the calibration block and scores every
    test point.  Repeats whose fit fails are skipped and counted.
    """
    D = dataset.D
    grid_m = config.grid_m or default_grid_m(D)
    full_m = config.full_grid_m or default_grid_m(D, full=True)
    per_repeat = []
    failures = 0
    for r in range(config.repeats):
        seed = int(np.random.SeedSequence([config.seed, r]).generate_state(1, np.uint64)[0])
        split = split_data(len(dataset), config.fractions, seed=seed)
        try:
            model = fit_mle(dataset.subset(split.train), fit_config)
        except FitError:
            failures += 1
            continue
        cal = dataset.subset(split.calibration)
        test = dataset.subset(split.test)
        res = evaluate_methods(
            config.methods,
            predict_params(model, cal.X, cal.Z), cal.Y,
            predict_params(model, test.X, test.Z), test.Y,
            config.alpha, grid_m, full_m,
        )
        per_repeat.append(res)
    if not per_repeat:
        raise FitError(f"all {config.repeats} fits failed")
    out = []
    for m in config.methods:
        cov = np.mean([100.0 * res[m][0].mean() for res in per_repeat])
        widths = np.mean([res[m][2].mean(axis=0) for res in per_repeat], axis=0)
        n_test = per_repeat[0][m][0].size
        secs = np.mean([res[m][3] / n_test for res in per_repeat])
        indiv = None
        if per_repeat[0][m][1] is not None:
            indiv = tuple(float(v) for v in
                          np.mean([100.0 * res[m][1].mean(axis=0) for res in per_repeat], axis=0))
        out.append(EvalSummary(label, m, float(cov), tuple(float(v) for v in widths),
                               float(secs), indiv, failures, len(per_repeat)))
    return out


@dataclass(frozen=True)
class RegionRecord:
    index: int
    method: str
    mp: object
    region: object
    y: Optional[np.ndarray]
    covered: Optional[bool]
    q: float


def predict_regions(model, calibration: Dataset, test: Dataset, method: str = QR,
                    alpha: float = 0.1, grid_m: Optional[int] = None,
                    has_response: bool = True) -> list:
    """Calibrate ``method`` on ``calibration`` and build a region per test row."""
    from .conformal import conformal_quantile, qr_region, qr_score
    from .hdr import floor_polytope, grid_region, nll_score
    from .simulation import METHODS, SIMPLEX_GRID
    from .hdr import full_grid_region

    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}")
    mp_cal = predict_params(model, calibration.X, calibration.Z)
    mp_test = predict_params(model, test.X, test.Z)
    grid_m = grid_m or default_grid_m(model.D, full=method == SIMPLEX_GRID)
    if method == QR:
        q = conformal_quantile(qr_score(calibration.Y, mp_cal), alpha)
    else:
        q = conformal_quantile(nll_score(calibration.Y, mp_cal), alpha)
    out = []
    for t in range(len(test)):
        mp = mp_test[t]
        if method == QR:
            region = qr_region(mp, q)
        elif method == HDR_FLOOR:
            region = floor_polytope(mp, q)
        elif method == HDR_GRID:
            region = grid_region(mp, q, grid_m)
        else:
            region = full_grid_region(mp, q, grid_m)
        y = test.Y[t] if has_response else None
        out.append(RegionRecord(t, method, mp, region, y,
                                None if y is None else region.contains(y), q.value))
    return out
