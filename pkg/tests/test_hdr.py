import math

import numpy as np
import pytest
from scipy import stats

from simplexconf.dirichlet import MeanPrecision, ShapeParams, log_density, to_mean_precision
from simplexconf.exceptions import DomainError
from simplexconf.hdr import (
    FloorPolytope,
    LevelData,
    floor_equation,
    floor_polytope,
    grid_region,
    interior_grid,
    lattice,
    level_threshold,
    nll_score,
    solve_floor,
)
from simplexconf.numerics import Bracket, find_root
from simplexconf.regression import predict_params
from simplexconf.simulation import generate_scenario, scenario


def law(*lam):
    return to_mean_precision(ShapeParams(np.array(lam, dtype=float)))


def brute_force_floor(lam, q, m=2000):
    """Smallest y_i over a barycentric grid restricted to the density level set."""
    k = np.arange(1, m)
    a, b = np.meshgrid(k, k, indexing="ij")
    keep = a + b < m
    y = np.column_stack([a[keep], b[keep], m - a[keep] - b[keep]]) / m
    dens = stats.dirichlet.logpdf(y.T, lam)
    inside = y[-dens <= q]
    return inside.min(axis=0)


def test_nll_score_uniform_two_parts(rng):
    mp = MeanPrecision([0.5, 0.5], 2.0)
    for t in rng.uniform(0.01, 0.99, 10):
        assert nll_score([t, 1 - t], mp) == pytest.approx(0.0, abs=1e-14)


def test_nll_score_centroid():
    assert nll_score(np.full(3, 1 / 3), law(2, 2, 2)) == pytest.approx(-math.log(120 / 27), abs=1e-12)


def test_nll_score_is_negated_density(rng):
    for _ in range(100):
        mp = MeanPrecision(rng.dirichlet([2, 2, 2]), rng.uniform(1, 50))
        y = rng.dirichlet(np.ones(3))
        assert nll_score(y, mp) == pytest.approx(-log_density(y, mp), abs=1e-14)


def test_level_threshold_uniform_boundary():
    level = level_threshold(law(1, 1, 1), -math.log(2.0))
    np.testing.assert_allclose(level.w, 0.0)
    assert level.t_star == pytest.approx(0.0, abs=1e-14)
    assert np.all(level.satisfied(np.random.default_rng(0).dirichlet([1, 1, 1], size=50)))


def test_level_threshold_identity(rng):
    checked = 0
    for _ in range(1000):
        mp = MeanPrecision(rng.dirichlet([2, 2, 2]), rng.uniform(1, 80))
        y = rng.dirichlet(np.ones(3))
        q = rng.normal(-2.0, 3.0)
        s = nll_score(y, mp)
        if abs(s - q) < 1e-9:
            continue
        assert (s <= q) == bool(level_threshold(mp, q).satisfied(y))
        checked += 1
    assert checked > 990


def test_level_threshold_decreasing_in_q():
    mp = law(4, 5, 6)
    ts = [level_threshold(mp, q).t_star for q in np.linspace(-5, 5, 21)]
    assert np.all(np.diff(ts) < 0)


def test_floor_equation_monotone(rng):
    rhos = np.logspace(-6, 6, 400)
    for _ in range(20):
        w = rng.uniform(0.1, 50, 3)
        for i in range(3):
            vals = [floor_equation(r, w, w.sum(), 0.0, i) for r in rhos]
            assert np.all(np.diff(vals) > 0)


def test_floor_equation_symmetric_weights():
    w = np.full(3, 4.0)
    for r in (0.01, 1.0, 50.0):
        vals = [floor_equation(r, w, 12.0, -3.0, i) for i in range(3)]
        assert vals[0] == vals[1] == vals[2]


def test_floor_equation_domain():
    with pytest.raises(DomainError):
        floor_equation(1.0, np.array([1.0, -1.0, 2.0]), 2.0, 0.0, 0)
    with pytest.raises(DomainError):
        floor_equation(0.0, np.ones(3), 3.0, 0.0, 0)


def test_floor_root_matches_bisection():
    level = level_threshold(law(3, 4, 5), -1.0)
    w, W, t = level.w, level.W, level.t_star
    for i in range(3):
        f = lambda r: floor_equation(r, w, W, t, i)
        root = find_root(f, Bracket(1e-6, 1e6), tol=1e-14)
        lo, hi = 1e-6, 1e6
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(mid) < 0:
                lo = mid
            else:
                hi = mid
        assert root == pytest.approx(0.5 * (lo + hi), rel=1e-8)


def test_solve_floor_fallback_for_nonpositive_weight():
    level = level_threshold(law(0.8, 3, 3), 0.0)
    assert all(solve_floor(level, i) == 0.0 for i in range(3))


def test_solve_floor_symmetric():
    mp = law(3, 3, 3)
    for q in (-1.0, 0.0, 1.5):
        level = level_threshold(mp, q)
        taus = [solve_floor(level, i) for i in range(3)]
        assert taus[0] == pytest.approx(taus[1], abs=1e-12)
        assert taus[1] == pytest.approx(taus[2], abs=1e-12)


@pytest.mark.parametrize("lam", [(3, 3, 3), (2.5, 6, 11)])
def test_solve_floor_brute_force(lam):
    mp = law(*lam)
    q = nll_score(np.asarray(lam) / sum(lam), mp) + 1.5
    oracle = brute_force_floor(np.asarray(lam, dtype=float), q)
    level = level_threshold(mp, q)
    taus = np.array([solve_floor(level, i) for i in range(3)])
    np.testing.assert_allclose(taus, oracle, atol=2e-3)


def test_floor_contains_exact_set():
    rng = np.random.default_rng(21)
    mp = law(4, 7, 9)
    q = nll_score(np.array([4, 7, 9]) / 20.0, mp) + 2.0
    floor = floor_polytope(mp, q)
    kept = []
    while sum(len(k) for k in kept) < 10 ** 4:
        y = rng.dirichlet([1, 1, 1], size=50000)
        kept.append(y[floor.level.satisfied(y)])
    y = np.vstack(kept)[:10 ** 4]
    assert np.sum(np.any(y < floor.tau, axis=1)) == 0


def test_floor_widths_equal():
    floor = floor_polytope(law(4, 7, 9), -1.0)
    wd = floor.widths()
    assert np.ptp(wd) == 0.0
    assert wd[0] == pytest.approx(1 - floor.tau.sum())


def test_floor_monotone_in_q():
    mp = law(5, 8, 12)
    # start just above the score at the mode so every level set is non-empty
    q_min = nll_score(np.array([4, 7, 11]) / 22, mp)
    prev = None
    for q in np.linspace(q_min + 0.01, q_min + 8.0, 30):
        tau = floor_polytope(mp, q).tau
        if prev is not None:
            assert np.all(tau <= prev + 1e-12)
        prev = tau


def test_floor_empty_level_set_falls_back():
    mp = law(5, 8, 12)
    q_min = nll_score(np.array([4, 7, 11]) / 22, mp)
    floor = floor_polytope(mp, q_min - 0.5)
    assert np.all(floor.tau == 0) and all(floor.fallback)


def test_floor_infinite_threshold():
    floor = floor_polytope(law(4, 7, 9), math.inf)
    assert np.all(floor.tau == 0) and all(floor.fallback)


def test_interior_grid_construction():
    floor = FloorPolytope(np.array([0.1, 0.05, 0.2]), LevelData(0.0, np.ones(3), 3.0, 0.0))
    for m in (2, 7, 30):
        pts = interior_grid(floor, m)
        assert np.all(pts >= floor.tau - 1e-12)
        np.testing.assert_allclose(pts.sum(axis=1), 1.0, atol=1e-12)


def test_interior_grid_zero_floor_enumeration():
    floor = FloorPolytope(np.zeros(3), LevelData(-math.inf, np.ones(3), 3.0, math.inf))
    pts = interior_grid(floor, 3)
    assert pts.shape == (6, 3)
    expected = {(1, 0, 0), (0, 1, 0), (0, 0, 1), (0.5, 0.5, 0), (0.5, 0, 0.5), (0, 0.5, 0.5)}
    got = {tuple(float(v) for v in np.round(p, 9)) for p in pts}
    assert got == expected
    assert np.all(pts > 0)


def test_grid_point_count_nondecreasing():
    counts = [lattice(3, m).shape[0] for m in range(2, 40)]
    assert np.all(np.diff(counts) >= 0)
    counts4 = [lattice(4, m).shape[0] for m in range(2, 15)]
    assert np.all(np.diff(counts4) >= 0)


def test_grid_region_filter_and_widths():
    mp = law(6, 8, 10)
    q = nll_score(np.array([6, 8, 10]) / 24, mp) + 2.0
    g = grid_region(mp, q, 60)
    assert g.accepted.shape[0] > 0
    assert np.all(g.level.satisfied(g.accepted))
    assert np.all(g.widths() <= floor_polytope(mp, q).widths() + 1e-12)


def test_grid_widths_converge_in_m():
    from simplexconf.regression import fit_mle

    spec = scenario("1a")
    rng = np.random.default_rng(31)
    data = generate_scenario(spec, rng)
    model = fit_mle(data.subset(np.arange(700)))
    cal = data.subset(np.arange(700, 1000))
    q = np.sort(nll_score(cal.Y, predict_params(model, cal.X, cal.Z)))[270]
    test = generate_scenario(spec, rng, n=20)
    mps = predict_params(model, test.X, test.Z)
    for t in range(20):
        fine = grid_region(mps[t], q, 200).widths()
        coarse = grid_region(mps[t], q, 50).widths()
        assert np.all(np.abs(fine - coarse) <= 0.02)


def test_grid_membership_is_exact():
    mp = law(6, 8, 10)
    q = nll_score(np.array([6, 8, 10]) / 24, mp) + 2.0
    g = grid_region(mp, q, 5)
    rng = np.random.default_rng(2)
    for y in rng.dirichlet([6, 8, 10], size=200):
        assert g.contains(y) == (nll_score(y, mp) <= q)
