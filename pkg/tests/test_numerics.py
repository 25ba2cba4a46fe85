import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from simplexconf.exceptions import BracketError, ConvergenceError, DomainError
from simplexconf.numerics import (
    Bracket,
    beta_cdf,
    beta_quantile,
    digamma,
    find_root,
    log_gamma,
    normal_cdf,
    normal_quantile,
)

# reference values computed with mpmath at 30 digits
NORMAL_975 = 1.95996398454005423552
CDF_AT_1_959964 = 0.975000000903557598


@pytest.mark.parametrize("x, expected", [(1.0, 0.0), (0.5, 0.5723649429), (5.0, 3.1780538303)])
def test_log_gamma_values(x, expected):
    assert log_gamma(x) == pytest.approx(expected, abs=1e-10)


def test_log_gamma_half_is_log_sqrt_pi():
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-14)


@pytest.mark.parametrize("x, expected",
                         [(1.0, -0.5772156649), (2.0, 0.4227843351), (0.5, -1.9635100260)])
def test_digamma_values(x, expected):
    assert digamma(x) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("fn", [log_gamma, digamma])
@pytest.mark.parametrize("x", [0.0, -1.0, math.nan, math.inf])
def test_special_functions_reject_bad_domain(fn, x):
    with pytest.raises(DomainError):
        fn(x)


def test_vector_input_returns_array():
    out = log_gamma(np.array([1.0, 2.0, 3.0]))
    assert isinstance(out, np.ndarray)
    np.testing.assert_allclose(out, [0.0, 0.0, math.log(2.0)], atol=1e-14)


def test_beta_cdf_examples():
    assert beta_cdf(0.5, 1, 1) == pytest.approx(0.5, abs=1e-15)
    assert beta_cdf(0.5, 2, 2) == pytest.approx(0.5, abs=1e-15)
    # integer parameters: P(Binomial(4, 0.4) >= 2)
    oracle = sum(math.comb(4, k) * 0.4 ** k * 0.6 ** (4 - k) for k in range(2, 5))
    assert oracle == pytest.approx(0.5248, abs=1e-12)
    assert beta_cdf(0.4, 2, 3) == pytest.approx(oracle, abs=1e-12)


def test_beta_cdf_endpoints_and_domain():
    assert beta_cdf(0.0, 2, 3) == 0.0
    assert beta_cdf(1.0, 2, 3) == 1.0
    with pytest.raises(DomainError):
        beta_cdf(1.2, 2, 3)
    with pytest.raises(DomainError):
        beta_cdf(0.5, 0.0, 3)


def test_beta_quantile_examples():
    assert beta_quantile(0.5, 1, 1) == pytest.approx(0.5, abs=1e-12)
    assert beta_quantile(0.5248, 2, 3) == pytest.approx(0.4, abs=1e-10)
    assert beta_quantile(0.0, 2, 3) == 0.0
    assert beta_quantile(1.0, 2, 3) == 1.0


@pytest.mark.parametrize("a, b", [(2, 8), (5, 5)])
def test_beta_roundtrip(a, b):
    ys = np.linspace(0.1, 0.9, 9)
    back = np.array([beta_quantile(beta_cdf(y, a, b), a, b) for y in ys])
    np.testing.assert_allclose(back, ys, atol=1e-8)


def test_normal_cdf_examples():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(1.9599640) == pytest.approx(CDF_AT_1_959964, abs=1e-9)
    assert normal_cdf(-3.0) == pytest.approx(1.0 - normal_cdf(3.0), abs=1e-15)


def test_normal_quantile_examples():
    assert normal_quantile(0.5) == 0.0
    assert normal_quantile(0.975) == pytest.approx(NORMAL_975, abs=1e-9)
    assert normal_quantile(0.0) == -math.inf
    assert normal_quantile(1.0) == math.inf
    with pytest.raises(DomainError):
        normal_quantile(1.5)


@given(st.floats(-5, 5))
@settings(max_examples=200, deadline=None)
def test_normal_roundtrip(z):
    assert normal_quantile(normal_cdf(z)) == pytest.approx(z, abs=1e-8)


def test_find_root_examples():
    assert find_root(lambda x: x * x - 2, Bracket(1, 2)) == pytest.approx(math.sqrt(2), abs=1e-8)
    assert find_root(lambda x: x - 0.3, Bracket(0, 1)) == pytest.approx(0.3, abs=1e-10)


def test_find_root_needs_sign_change():
    with pytest.raises(BracketError):
        find_root(lambda x: x * x + 1, Bracket(-1, 1))


def test_find_root_iteration_budget():
    with pytest.raises(ConvergenceError):
        find_root(lambda x: x ** 3 - 0.123, Bracket(0, 1), tol=1e-15, max_iter=2)


def test_bracket_order():
    with pytest.raises(BracketError):
        Bracket(2.0, 1.0)
