import math

import numpy as np
import pytest

from simplexconf.application import predict_regions
from simplexconf.conformal import BoxRegion
from simplexconf.hdr import FloorPolytope, LevelSetGrid
from simplexconf.regression import fit_mle
from simplexconf.reporting import (
    read_region,
    read_summaries,
    summary_columns,
    write_regions,
    write_summaries,
)
from simplexconf.simulation import HDR_FLOOR, HDR_GRID, QR, EvalSummary, generate_scenario, scenario


def test_summary_header():
    assert summary_columns(3) == [
        "scenario", "method", "coverage_pct", "cov_y1", "cov_y2", "cov_y3",
        "width_y1", "width_y2", "width_y3", "mean_time_s", "failures",
    ]


def test_summary_roundtrip(tmp_path):
    rows = [
        EvalSummary("1a", QR, 90.6, (0.1 / 3, 0.40612345678901234, 0.4034), 0.0123,
                    (96.1, 96.6, 96.8), 0, 1000),
        EvalSummary("1a", HDR_FLOOR, 94.4, (0.5668,) * 3, 1e-3, None, 2, 998),
    ]
    write_summaries(rows, tmp_path / "s.csv")
    back = read_summaries(tmp_path / "s.csv")
    for a, b in zip(rows, back):
        assert (a.scenario, a.method, a.empirical_coverage) == (b.scenario, b.method, b.empirical_coverage)
        assert a.mean_widths == b.mean_widths
        assert a.mean_time_seconds == b.mean_time_seconds
        assert a.individual_coverage == b.individual_coverage
        assert a.failures == b.failures


def test_summary_without_timing(tmp_path):
    rows = [EvalSummary("1a", QR, 90.0, (0.4,) * 3, 0.5, None, 0, 10)]
    write_summaries(rows, tmp_path / "s.csv", timing=False)
    assert math.isnan(read_summaries(tmp_path / "s.csv")[0].mean_time_seconds)
    assert ",0.5," not in (tmp_path / "s.csv").read_text()


@pytest.fixture(scope="module")
def calibrated():
    rng = np.random.default_rng(6)
    data = generate_scenario(scenario("1a"), rng)
    model = fit_mle(data.subset(np.arange(700)))
    return model, data.subset(np.arange(700, 1000)), generate_scenario(scenario("1a"), rng, n=4)


@pytest.mark.parametrize("method, kind", [(QR, BoxRegion), (HDR_FLOOR, FloorPolytope),
                                          (HDR_GRID, LevelSetGrid)])
def test_region_csv_roundtrip(tmp_path, calibrated, method, kind):
    model, cal, test = calibrated
    recs = predict_regions(model, cal, test, method, 0.1, grid_m=40)
    write_regions(recs, tmp_path / "r.csv")
    for i, rec in enumerate(recs):
        region, mean, y = read_region(tmp_path / "r.csv", i)
        assert isinstance(region, kind)
        np.testing.assert_array_equal(mean, rec.mp.mu)
        np.testing.assert_array_equal(y, rec.y)
        np.testing.assert_array_equal(region.widths(), rec.region.widths())
        assert region.contains(y) == rec.covered
