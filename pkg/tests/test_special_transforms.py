import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from ineqforge import radial_core as rc
from ineqforge import special_transforms as sp_t
from ineqforge.errors import DomainError, UnsupportedOrderError
from ineqforge.families import GAUSSIAN_POLY, RATIONAL, bump_corpus, gaussian
from ineqforge.norms import lp_norm

# 200-term power series at 40 digits
J2_AT_5 = 0.04656511627775221553230328
RHO = np.linspace(0.0, 3.0, 31)


def pi_gaussian(grid):
    return gaussian(grid, order=4, width=1 / math.sqrt(math.pi))


def test_j0_at_zero():
    assert float(sp_t.bessel_j(0, 0.0)) == 1.0
    assert float(sp_t.bessel_j(2.5, 0.0)) == 0.0


@pytest.mark.parametrize("x", [1.0, 10.0])
def test_half_order_closed_form(x):
    assert float(sp_t.bessel_j(0.5, x)) == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.sin(x), rel=1e-12)


def test_j2_series_oracle():
    assert float(sp_t.bessel_j(2, 5.0)) == pytest.approx(J2_AT_5, rel=1e-12)


@pytest.mark.parametrize("nu", [0, 0.5, 1, 1.5, 2, 3.5, 5, 8, 12.5, 20, 25])
def test_against_scipy_across_regimes(nu):
    x = np.concatenate([np.geomspace(1e-3, 1e4, 400), [2 * nu, max(12, 2 * nu)]])
    ours = sp_t.bessel_j(nu, x)
    ref = special.jv(nu, x)
    # relative to the local envelope so zeros do not blow up the comparison
    env = np.maximum(np.abs(ref), np.abs(special.jv(nu + 1, x)))
    assert np.max(np.abs(ours - ref) / env) <= 1e-10


@pytest.mark.parametrize("nu,x", [(1.5, 37.0), (7, 7.0), (25, 60.0), (3, 9000.0)])
def test_against_mpmath(nu, x):
    assert float(sp_t.bessel_j(nu, x)) == pytest.approx(float(mp.besselj(nu, x)), rel=1e-10)


def test_order_ceiling():
    with pytest.raises(UnsupportedOrderError):
        sp_t.bessel_j(25.5, 1.0)


@pytest.mark.parametrize("N", [3, 4, 5, 7, 9])
def test_bessel_bound(N):
    s = np.linspace(1e-3, 100, 20000)
    C = sp_t.bessel_bound_constant(N / 2, s)
    bound = C * s ** (N / 2) / (1 + s) ** ((N + 1) / 2)
    assert np.all(np.abs(special.jv(N / 2, s)) <= bound * (1 + 1e-12))
    assert 0 < C < 10


@pytest.mark.parametrize("N", [3, 4, 5, 6, 7, 8, 9])
def test_gaussian_fixed_point(grid, N):
    out = sp_t.fourier_radial(pi_gaussian(grid), N, RHO)
    assert np.max(np.abs(out.values - np.exp(-math.pi * RHO ** 2))) <= 1e-8


def test_zero_frequency_is_mass(grid):
    u = RATIONAL.profile(grid, 2, a=3.0)
    mass = 4 * math.pi * rc.weighted_integral(u, 2)
    assert float(sp_t.fourier_radial(u, 3, [0.0]).values[0]) == pytest.approx(mass, rel=1e-10)


@pytest.mark.parametrize("N", [3, 5, 7])
def test_dimension_shift_gaussian(grid, N):
    assert sp_t.dimension_shift_check(pi_gaussian(grid), N, RHO) <= 1e-8


def test_dimension_shift_rational(grid):
    assert sp_t.dimension_shift_check(RATIONAL.profile(grid, 4, a=3.0), 5, RHO) <= 1e-6


@pytest.mark.parametrize("N", [3, 5])
def test_dimension_shift_random(grid, N):
    for u in bump_corpus(5, seed=N, grid=grid):
        assert sp_t.dimension_shift_check(u, N, RHO) <= 1e-6


@given(st.floats(-4, 4).filter(lambda c: abs(c) > 1e-2))
def test_dimension_shift_linearity(c):
    g = rc.default_grid(1024)
    u = bump_corpus(1, seed=5, grid=g)[0]
    a = sp_t.dimension_shift_check(u, 5, RHO)
    b = sp_t.dimension_shift_check(u * c, 5, RHO)
    assert b == pytest.approx(a, rel=1e-6, abs=1e-14)


@pytest.mark.parametrize("N", [3, 5, 7])
def test_plancherel(grid, N):
    for u in [gaussian(grid, order=2)] + bump_corpus(3, seed=N, grid=grid):
        direct = lp_norm(u, N, 2).value ** 2
        assert sp_t.seminorm_via_fourier(u, N, 0) == pytest.approx(direct, rel=1e-6)


def test_sigma_one_two_routes(grid):
    N = 5
    u = GAUSSIAN_POLY.profile(grid, 4, a=0.4, b=0.1)
    fourier = sp_t.seminorm_via_fourier(u, N, 1)
    grad = rc.sphere_area(N) * rc.squared_integral(u.derivatives[0], grid, N - 1).value
    assert fourier == pytest.approx(grad, rel=1e-6)
    # dimension shift: v = U'/r on R^{N+2}, Plancherel there
    v = rc.over_r(u)
    shifted = rc.sphere_area(N) / rc.sphere_area(N + 2) * sp_t.seminorm_via_fourier(v, N + 2, 0)
    assert fourier == pytest.approx(shifted, rel=1e-6)


def test_gap_identity_m1(grid):
    for N in (3, 5, 7):
        for u in [gaussian(grid, order=4)] + bump_corpus(3, seed=N, grid=grid):
            lb = sp_t.radial_lower_bound_check(u, N, 1, "even")
            assert lb.lhs - lb.rhs == pytest.approx(lb.gap_formula, rel=1e-7)


def test_lower_bound_r2_gaussian(grid):
    r = grid.nodes
    u = GAUSSIAN_POLY.profile(grid, 8, a=1.0, b=0.0) - gaussian(grid, order=8)   # r^2 e^{-r^2}
    assert np.allclose(u.values, r ** 2 * np.exp(-r ** 2), atol=1e-15)
    lb = sp_t.radial_lower_bound_check(u, 5, 1)
    assert lb.lhs >= lb.rhs - lb.eps


@pytest.mark.parametrize("N,m,parity", [(3, 2, "even"), (5, 3, "even"), (4, 2, "odd"), (6, 3, "odd")])
def test_lower_bound_boundary_dimensions(grid, N, m, parity):
    for u in [gaussian(grid, order=8)] + bump_corpus(2, seed=m, grid=grid, order=8):
        lb = sp_t.radial_lower_bound_check(u, N, m, parity)
        assert lb.lhs >= lb.rhs - lb.eps


@pytest.mark.parametrize("N,m,parity", [(2, 2, "even"), (3, 2, "odd")])
def test_lower_bound_domain(grid, N, m, parity):
    with pytest.raises(DomainError):
        sp_t.radial_lower_bound_check(gaussian(grid, order=8), N, m, parity)


def test_recursion_constant_v(grid):
    rc_ = sp_t.recursion_identity_check(rc.RadialProfile(grid, np.ones(grid.n), (np.zeros(grid.n),) * 6), 5, 1)
    assert rc_.lhs == pytest.approx(rc_.rhs, abs=1e-20)


def test_recursion_gaussian(grid):
    chk = sp_t.recursion_identity_check(gaussian(grid, order=8), 5, 1)
    assert chk.lhs == pytest.approx(chk.rhs, rel=1e-6)
    assert chk.lhs_next == pytest.approx(chk.rhs_next, rel=1e-6)


@pytest.mark.parametrize("N", [5, 7, 9])
@pytest.mark.parametrize("k", [1, 2])
def test_recursion_sign(grid, N, k):
    for v in [gaussian(grid, order=8)] + bump_corpus(3, seed=N * k, grid=grid, order=8):
        chk = sp_t.recursion_identity_check(v, N, k)
        assert chk.lhs == pytest.approx(chk.rhs, rel=1e-6)
        assert 2 * k * (2 * k - N) <= 0
        assert chk.lhs <= chk.leading * (1 + 1e-9)
