import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from ineqforge import radial_core as rc
from ineqforge.errors import NumericError, ParameterError, UnsupportedOrderError
from ineqforge.families import GAUSSIAN_POLY, RATIONAL, bump_corpus, gaussian

# (1+r^2)^-4 r^4 on (0, inf), adaptive quad at epsrel 1e-13
RATIONAL_BETA4 = 0.09817477042468102


def grid_norm(grid, x, N=5):
    """L2 norm against the quadrature weights and the measure r^{N-1} dr."""
    return float(np.sqrt(grid.weights @ (x * x * grid.nodes ** (N - 1))))


def _fn(grid, f):
    return rc.profile_from_function(grid, f)


def test_log_uniform_grid_spans_eight_decades():
    g = rc.make_grid("log-uniform", 1e-4, 1e4, 1024)
    assert g.n == 1024
    assert np.all(np.diff(g.nodes) > 0)
    ratios = g.nodes[1:] / g.nodes[:-1]
    assert np.allclose(ratios, ratios[0], rtol=1e-12)
    assert g.nodes[0] == pytest.approx(1e-4, rel=1e-12)
    assert g.nodes[-1] == pytest.approx(1e4, rel=1e-12)


def test_grid_rejects_bad_bounds():
    with pytest.raises(ParameterError):
        rc.make_grid("log-uniform", 2.0, 1.0, 64)
    with pytest.raises(ParameterError):
        rc.make_grid("log-uniform", 1.0, 2.0, 8)
    with pytest.raises(ParameterError):
        rc.make_grid("triangular", 1.0, 2.0, 64)


def test_grid_is_immutable():
    g = rc.make_grid(n=64)
    with pytest.raises((ValueError, AttributeError, TypeError)):
        g.nodes[0] = 1.0


@pytest.mark.parametrize("kind", ["log-uniform", "mapped-Chebyshev"])
def test_unit_integrals(kind):
    g = rc.make_grid(kind, 1.0, 2.0, 128)
    assert abs(g.weights @ np.ones(g.n) - 1.0) <= 1e-12
    g = rc.make_grid(kind, 1.0, math.e, 128)
    assert abs(g.weights @ (1.0 / g.nodes) - 1.0) <= 1e-10


@pytest.mark.parametrize("kind", ["log-uniform", "mapped-Chebyshev"])
@pytest.mark.parametrize("beta", [-1, 0, 1, 2])
def test_power_weights_exact(kind, beta):
    a, b = 0.3, 7.0
    g = rc.make_grid(kind, a, b, 256)
    exact = math.log(b / a) if beta == -1 else (b ** (beta + 1) - a ** (beta + 1)) / (beta + 1)
    assert g.weights @ g.nodes ** beta == pytest.approx(exact, rel=1e-10)


def test_first_derivative_gaussian(grid):
    r = grid.nodes
    d = rc.derivative(_fn(grid, lambda x: np.exp(-x ** 2 / 2)), 1)
    m = (r >= 0.01) & (r <= 5)
    assert np.max(np.abs(d.values + r * np.exp(-r ** 2 / 2))[m]) <= 1e-9


def test_third_derivative_cubic(grid):
    r = grid.nodes
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d = rc.derivative(_fn(grid, lambda x: x ** 3), 3)
    m = (r >= 0.01) & (r <= 5)
    assert np.max(np.abs(d.values[m] / 6.0 - 1.0)) <= 1e-7


def test_fourth_derivative_sine():
    # sin does not decay, so the example runs on a bounded Chebyshev grid
    g = rc.make_grid("mapped-Chebyshev", 1e-2, 5.0, 128)
    r = g.nodes
    d = rc.derivative(_fn(g, np.sin), 4)
    m = np.abs(np.sin(r)) > 0.1
    assert np.max(np.abs(d.values[m] / np.sin(r[m]) - 1.0)) <= 1e-8


def test_derivative_order_cap(grid):
    with pytest.raises(UnsupportedOrderError):
        rc.derivative(gaussian(grid, order=0), 9)


def test_commutation(grid):
    u = GAUSSIAN_POLY.profile(grid, 0, a=0.5, b=0.2)
    once = rc.derivative(rc.derivative(u, 1), 1).values
    twice = rc.derivative(u, 2).values
    assert grid_norm(grid, once - twice) <= 1e-7 * grid_norm(grid, twice)


def test_numeric_derivative_matches_cache(grid):
    u = GAUSSIAN_POLY.profile(grid, 4, a=-0.3, b=0.1)
    num = rc.derivative(u.without_cache(), 2).values
    exact = u.derivatives[1]
    assert grid_norm(grid, num - exact) <= 1e-7 * grid_norm(grid, exact)
    m = grid.nodes >= 1e-2
    assert np.max(np.abs(num - exact)[m]) <= 1e-7 * np.max(np.abs(exact))


def test_weighted_integral_gamma(grid):
    assert rc.weighted_integral(_fn(grid, lambda x: np.exp(-x)), 4) == pytest.approx(24.0, abs=1e-8)


def test_weighted_integral_half_gaussian(grid):
    v = rc.weighted_integral(_fn(grid, lambda x: np.exp(-x ** 2)), 0)
    assert abs(v - math.sqrt(math.pi) / 2) <= 1e-10


def test_weighted_integral_rational_oracle(grid):
    v = rc.weighted_integral(_fn(grid, lambda x: (1 + x ** 2) ** -4.0), 4)
    assert v == pytest.approx(RATIONAL_BETA4, rel=1e-8)
    assert RATIONAL_BETA4 == pytest.approx(math.pi / 32, rel=1e-14)


@pytest.mark.parametrize("beta", range(-2, 7))
def test_quadrature_against_adaptive(grid, beta):
    # bump compactly supported well inside the grid
    f = lambda x: np.exp(-np.log(x) ** 2 / 0.5) if np.ndim(x) else math.exp(-math.log(x) ** 2 / 0.5)
    oracle = quad(lambda x: f(x) * x ** beta, 1e-3, 1e3, points=[1.0], limit=400,
                  epsabs=0, epsrel=1e-13)[0]
    assert rc.weighted_integral(_fn(grid, f), beta) == pytest.approx(oracle, rel=1e-8)


def test_tail_flag_on_slow_decay(grid):
    res = rc.weighted_integral(_fn(grid, lambda x: (1 + x) ** -0.9), 0, report=True)
    assert "divergent-high" in res.flags
    ok = rc.weighted_integral(_fn(grid, lambda x: (1 + x) ** -1.5), 0, report=True)
    assert not ok.flags and ok.value == pytest.approx(2.0, rel=1e-8)


def test_non_finite_rejected(grid):
    with pytest.raises(NumericError):
        rc.integrate(grid, np.full(grid.n, np.nan))


def test_laplacian_gaussian(grid):
    r = grid.nodes
    L = rc.radial_laplacian(_fn(grid, lambda x: np.exp(-x ** 2 / 2)), 5)
    exact = (r ** 2 - 5) * np.exp(-r ** 2 / 2)
    m = (r >= 0.05) & (r <= 5) & (np.abs(exact) > 1e-3)
    assert np.max(np.abs(L.values[m] / exact[m] - 1)) <= 1e-8


@pytest.mark.parametrize("N", [2, 3, 5, 9])
def test_laplacian_quadratic(grid, N):
    r = grid.nodes
    L = rc.radial_laplacian(_fn(grid, lambda x: x ** 2), N)
    m = (r >= 0.05) & (r <= 5)
    assert np.max(np.abs(L.values[m] - 2 * N)) <= 1e-7 * 2 * N


def test_laplacian_rational_hand_oracle(grid):
    # U = 1/(1+r^2), N = 3: U'' + 2U'/r = (2r^2 - 6) / (1+r^2)^3
    r = grid.nodes
    L = rc.radial_laplacian(RATIONAL.profile(grid, 2, a=1.0), 3)
    exact = (2 * r ** 2 - 6) / (1 + r ** 2) ** 3
    m = (r >= 0.05) & (r <= 5)
    assert np.max(np.abs(L.values - exact)[m]) <= 1e-8


def test_iterated_laplacian_matches_repeated(grid):
    u = gaussian(grid, order=4)
    twice = rc.radial_laplacian(rc.radial_laplacian(u, 5), 5).values
    assert np.allclose(rc.iterated_laplacian(u, 5, 2).values, twice, rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("N,expected", [(2, 2 * math.pi), (3, 4 * math.pi), (5, 8 * math.pi ** 2 / 3)])
def test_sphere_area(N, expected):
    assert rc.sphere_area(N) == pytest.approx(expected, rel=1e-14)


def test_ball_volume_relation():
    for N in range(1, 10):
        assert rc.ball_volume(N) == pytest.approx(rc.sphere_area(N) / N, rel=1e-14)


@pytest.mark.parametrize("N", [3, 5, 6, 9])
def test_laplacian_expansion_identity(grid, N):
    for v in bump_corpus(5, seed=N, grid=grid):
        lap = rc.radial_laplacian(v, N).values
        lhs = rc.squared_integral(lap, grid, N - 1).value
        d1, d2 = v.stack(2)[1:]
        rhs = (rc.squared_integral(d2, grid, N - 1).value
               + (N - 1) * rc.squared_integral(d1, grid, N - 3).value)
        assert lhs == pytest.approx(rhs, rel=1e-7)


def test_profile_file_roundtrip(tmp_path, grid):
    u = gaussian(grid, order=0)
    path = tmp_path / "u.txt"
    rc.write_profile(u, path)
    back = rc.read_profile(path, grid)
    assert np.allclose(back.values, u.values, rtol=1e-12, atol=1e-300)


def test_profile_rejects_nonfinite(grid):
    with pytest.raises(NumericError):
        rc.RadialProfile(grid, np.full(grid.n, np.inf))


@given(st.floats(-3, 3), st.floats(0.2, 5.0))
def test_linearity_of_derivative(c, lam):
    g = rc.default_grid(512)
    u = gaussian(g, order=0, width=lam)
    d1 = rc.derivative(u * c, 1).values
    d2 = c * rc.derivative(u, 1).values
    assert grid_norm(g, d1 - d2) <= 1e-12 * max(grid_norm(g, d2), 1e-300)


@given(st.floats(0.3, 3.0), st.floats(-1.0, 4.0))
def test_dilation_scaling_of_integral(lam, beta):
    g = rc.default_grid(1024)
    f = lambda x: np.exp(-x ** 2)
    a = rc.weighted_integral(_fn(g, lambda x: f(lam * x)), beta)
    b = rc.weighted_integral(_fn(g, f), beta)
    assert a == pytest.approx(lam ** (-beta - 1) * b, rel=1e-8)
