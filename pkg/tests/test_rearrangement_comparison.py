import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from ineqforge import rearrangement_comparison as rcmp
from ineqforge.errors import DomainError, ParameterError


def disk_fields(n, k):
    g = rcmp.make_domain("disk", n)
    X, Y = g.coords
    rho = np.hypot(X - 0.5, Y - 0.5)
    u = rcmp.polyharmonic_navier_2d(rcmp.forcing("constant", g), k)
    return g, u, rcmp.disk_constant_solution(0.5, rho, k)


def test_domain_shapes():
    sq = rcmp.make_domain("square", 16)
    assert sq.count == 15 * 15
    ls = rcmp.make_domain("lshape", 16)
    assert ls.count < sq.count
    dk = rcmp.make_domain("disk", 64)
    assert dk.disk_radius == pytest.approx(0.5, rel=0.05)
    with pytest.raises(ParameterError):
        rcmp.make_domain("triangle", 16)


def test_disk_closed_form_by_hand():
    r, R, N = sp.symbols("r R N", positive=True)
    lap = lambda e: sp.diff(e, r, 2) + (N - 1) / r * sp.diff(e, r)
    v1 = (R ** 2 - r ** 2) / (2 * N)
    v0 = (R ** 2 - r ** 2) * R ** 2 / (4 * N ** 2) - (R ** 4 - r ** 4) / (8 * N * (N + 2))
    assert sp.simplify(-lap(v1) - 1) == 0
    assert sp.simplify(-lap(v0) - v1) == 0
    assert v0.subs(r, R) == 0 and v1.subs(r, R) == 0


@pytest.mark.parametrize("k", [1, 2])
def test_disk_constant_forcing_first_order(k):
    errs = []
    for n in (32, 64, 128):
        g, u, exact = disk_fields(n, k)
        err = np.max(np.abs(u.values - exact)[g.mask])
        assert err <= 3.0 * g.h * np.max(exact)
        errs.append(err)
    assert errs[0] > errs[1] > errs[2]


def test_zero_forcing():
    g = rcmp.make_domain("lshape", 32)
    u = rcmp.solve_poisson_2d(rcmp.Field2D(g, np.zeros(g.mask.shape)))
    assert np.all(u.values == 0.0)


@given(st.integers(0, 10_000))
def test_maximum_principle(seed):
    g = rcmp.make_domain("lshape", 32)
    f = np.random.default_rng(seed).uniform(0, 1, g.mask.shape)
    u = rcmp.solve_poisson_2d(rcmp.Field2D(g, f))
    assert np.all(u.interior >= -1e-12)


def test_k1_equals_poisson():
    g = rcmp.make_domain("square", 32)
    f = rcmp.forcing("wave", g)
    a = rcmp.polyharmonic_navier_2d(f, 1).values
    b = rcmp.solve_poisson_2d(f).values
    assert np.array_equal(a, b)


@given(st.integers(0, 10_000))
def test_navier_linearity(seed):
    g = rcmp.make_domain("lshape", 24)
    rng = np.random.default_rng(seed)
    f1 = rcmp.Field2D(g, rng.normal(size=g.mask.shape))
    f2 = rcmp.Field2D(g, rng.normal(size=g.mask.shape))
    u12 = rcmp.polyharmonic_navier_2d(f1 + f2, 2).values
    u1 = rcmp.polyharmonic_navier_2d(f1, 2).values
    u2 = rcmp.polyharmonic_navier_2d(f2, 2).values
    assert np.max(np.abs(u12 - u1 - u2)) <= 1e-8 * max(np.max(np.abs(u12)), 1e-300)


def test_k_range():
    g = rcmp.make_domain("square", 16)
    with pytest.raises(DomainError):
        rcmp.polyharmonic_navier_2d(rcmp.forcing("constant", g), 4)


def test_schwarz_radial_input():
    g, u, exact = disk_fields(64, 1)
    prof = rcmp.schwarz_2d(u)
    rho = prof.grid.nodes
    ref = rcmp.disk_constant_solution(0.5, rho, 1)
    assert np.max(np.abs(prof.values - ref)) <= 5 * g.h * np.max(ref) + 5 * g.h


@pytest.mark.parametrize("domain", ["square", "lshape"])
def test_schwarz_level_areas(domain):
    g = rcmp.make_domain(domain, 48)
    u = rcmp.polyharmonic_navier_2d(rcmp.forcing("bump", g), 1)
    d = rcmp.rearrange_field(u)
    for lam in np.linspace(0.05, 0.95, 10) * u.max_abs():
        cells = np.count_nonzero(np.abs(u.interior) > lam) * g.h ** 2
        assert abs(cells - d.level_area(lam)) <= g.h ** 2
        # continuous area of {u* > lam} on the disk
        rho = np.linspace(0, d.disk_radius, 20001)
        inside = rho[d(rho) > lam]
        area = math.pi * inside.max() ** 2 if inside.size else 0.0
        assert abs(area - cells) <= 2 * g.h ** 2 + 2 * math.pi * d.disk_radius * (rho[1] - rho[0])


def test_schwarz_l2_preserved():
    g = rcmp.make_domain("lshape", 64)
    u = rcmp.polyharmonic_navier_2d(rcmp.forcing("wave", g), 1)
    d = rcmp.rearrange_field(u)
    assert math.sqrt(np.sum(d.values ** 2)) * g.h == pytest.approx(u.l2(), rel=1e-12)
    prof = rcmp.schwarz_2d(u)
    from ineqforge.norms import lp_norm
    assert lp_norm(prof, 2, 2).value == pytest.approx(u.l2(), abs=5 * g.h * u.max_abs())


def test_schwarz_flags_sign_change():
    g = rcmp.make_domain("square", 32)
    prof = rcmp.schwarz_2d(rcmp.Field2D(g, -np.ones(g.mask.shape)))
    assert "abs-taken" in prof.flags and np.all(prof.values >= 0)


def test_radial_solver_exact_on_polynomials():
    R = 0.7
    P, lev = rcmp.radial_navier_levels(lambda r: np.ones_like(r), R, 2)
    r = P.nodes
    assert np.max(np.abs(lev[1] - rcmp.disk_constant_solution(R, r, 1))) <= 1e-10
    assert np.max(np.abs(lev[0] - rcmp.disk_constant_solution(R, r, 2))) <= 1e-10
    # N = 3 too
    P, lev = rcmp.radial_navier_levels(lambda r: np.ones_like(r), R, 2, N=3)
    assert np.max(np.abs(lev[0] - rcmp.disk_constant_solution(R, P.nodes, 2, N=3))) <= 1e-10


def test_disk_equality_case():
    rep = rcmp.run_case("disk", "constant", 1, 64)
    assert rep.passed
    assert rep.violation <= rep.tolerance
    assert rep.tolerance == pytest.approx(5 * rep.h * (rep.v_max + 1))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_comparison_square_and_lshape(k):
    for d in ("square", "lshape"):
        rep = rcmp.run_case(d, "bump", k, 64)
        assert rep.passed, rep.to_dict()
        assert len(rep.level_violations) == k - 1


def test_violation_shrinks_square_constant():
    a = rcmp.run_case("square", "constant", 1, 64)
    b = rcmp.run_case("square", "constant", 1, 128)
    assert a.passed and b.passed
    assert b.violation < a.violation
    assert b.violation / a.violation < 0.75


def test_report_fields_and_convention():
    rep = rcmp.run_case("lshape", "wave", 2, 32)
    d = rep.to_dict(with_fields=True)
    assert d["convention"] == "forcing rearranged from |f|"
    assert set(d["fields"]) == {"rho", "u_star", "v"}
    assert len(d["fields"]["rho"]) == rcmp.make_domain("lshape", 32).count
