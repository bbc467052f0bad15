"""Acceptance suite: one group of tests per criterion.

Every test carries ``@pytest.mark.criterion(n)``; the conftest hooks print a
single PASS/FAIL line per criterion at the end of the run.  Runtime limits are
per criterion, so each test charges its elapsed time to a shared budget.
"""
import math
import shutil
import time
from fractions import Fraction

import numpy as np
import pytest

from ineqforge import cli
from ineqforge import norms as nm
from ineqforge import quadratic_forms as qf
from ineqforge import radial_core as rc
from ineqforge import rearrangement_comparison as rcmp
from ineqforge import sharp_constants as sc
from ineqforge import special_transforms as sp_t
from ineqforge import verifier_harness as vh
from ineqforge.families import bump_corpus, gaussian

BUDGET = {1: 1.0, 2: 30.0, 3: 60.0, 4: 30.0, 5: 60.0, 6: 60.0, 7: 120.0, 8: 120.0,
          9: 120.0, 10: 60.0}
_SPENT = {}


class budget:
    """Charge the block's wall time to criterion n and fail if over budget."""

    def __init__(self, n):
        self.n = n

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        _SPENT[self.n] = _SPENT.get(self.n, 0.0) + time.perf_counter() - self.t0
        if exc[0] is None:
            assert _SPENT[self.n] < BUDGET[self.n], f"criterion {self.n} over budget: {_SPENT[self.n]:.1f}s"
        return False


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


# ---------------------------------------------------------------- 1. sharp constants

@pytest.mark.criterion(1)
def test_c1_sharp_constant_table():
    with budget(1):
        N = 5
        assert sc.c1(5, 1) == 25 / 16
        assert Fraction(sc.c1(5, 1)) == Fraction(N * N * (N - 4) ** 2, 16)
        for N in range(3, 13):
            assert sc.c2(N, 0) == pytest.approx((N - 2) ** 2 / 4, rel=1e-15)
        for m in range(1, 4):
            for N in range(4 * m + 1, 21):
                # C1(N, 0) is the empty product
                prev = sc.c1(N, m - 1) if m > 1 else 1.0
                cur = sc.c1(N, m)
                step = ((N + 4 * m - 4) * (N - 4 * m) / 4) ** 2
                assert cur / prev == pytest.approx(step, rel=1e-12, abs=0)


# ---------------------------------------------------------------- 2. ground-state identities

@pytest.mark.criterion(2)
@pytest.mark.parametrize("n,tol", [(2048, 1e-7), (512, 1e-5)])
@pytest.mark.parametrize("order", [4, 0], ids=["cached", "numeric"])
def test_c2_ground_state_identities(n, tol, order):
    with budget(2):
        grid = rc.default_grid(n)
        corpus = bump_corpus(50, seed=0, grid=grid, order=order)
        for v in corpus:
            lhs, rhs = qf.groundstate_identity_2nd(v, 5)
            assert rel(lhs, rhs) <= tol
            lhs, rhs = qf.groundstate_identity_1st(v, 5, 1)
            assert rel(lhs, rhs) <= tol


# ---------------------------------------------------------------- 3. dimension shift

RHO = np.linspace(0.0, 3.0, 31)


@pytest.mark.criterion(3)
@pytest.mark.parametrize("N", [3, 5, 7])
def test_c3_dimension_shift_gaussian(grid, N):
    with budget(3):
        u = gaussian(grid, order=4, width=1 / math.sqrt(math.pi))
        assert sp_t.dimension_shift_check(u, N, RHO) <= 1e-8


@pytest.mark.criterion(3)
def test_c3_dimension_shift_random_corpus(grid):
    with budget(3):
        for u in bump_corpus(10, seed=33, grid=grid):
            assert sp_t.dimension_shift_check(u, 5, RHO) <= 1e-6


# ---------------------------------------------------------------- 4. lower bounds, recursions

@pytest.mark.criterion(4)
def test_c4_gap_identity(grid):
    with budget(4):
        for N in (5, 7, 9):
            for u in [gaussian(grid, order=4)] + bump_corpus(5, seed=40 + N, grid=grid):
                lb = sp_t.radial_lower_bound_check(u, N, 1, "even")
                assert rel(lb.lhs - lb.rhs, lb.gap_formula) <= 1e-7


@pytest.mark.criterion(4)
@pytest.mark.parametrize("N", [5, 7, 9])
@pytest.mark.parametrize("k", [1, 2])
def test_c4_recursion_and_sign(grid, N, k):
    with budget(4):
        assert 2 * k * (2 * k - N) <= 0
        for v in [gaussian(grid, order=8)] + bump_corpus(5, seed=N * k, grid=grid, order=8):
            chk = sp_t.recursion_identity_check(v, N, k)
            assert chk.error <= 1e-6
            assert chk.error_next <= 1e-6
            # nonpositive coefficient: the leading term dominates
            assert chk.lhs <= chk.leading * (1 + 1e-9)


# ---------------------------------------------------------------- 5. Hardy-Rellich chain

@pytest.mark.criterion(5)
@pytest.mark.parametrize("N,m", [(5, 1), (7, 1), (9, 1), (9, 2)])
def test_c5_chain_links(grid, N, m):
    with budget(5):
        for u in [gaussian(grid, order=8)] + bump_corpus(10, seed=50 + N + m, grid=grid, order=8):
            rep = qf.hardy_rellich_chain(u, N, m)
            A = rep.terms[0]
            assert all(link >= -1e-8 * A for link in rep.links), rep.links


# ---------------------------------------------------------------- 6. Rellich sharpness

@pytest.mark.criterion(6)
def test_c6_rellich_sharpness_approach():
    with budget(6):
        c1 = sc.c1(5, 1)
        rep = vh.estimate_best_constant(5, 1, mode="rayleigh")
        assert c1 * (1 - 1e-6) <= rep.min_ratio <= 1.05 * c1
        for row in rep.rows:
            assert row["value"] >= c1 * (1 - 1e-6)
            assert all(s >= c1 * (1 - 1e-6) for s in row["starts"])


# ---------------------------------------------------------------- 7. Talenti comparison

@pytest.mark.criterion(7)
@pytest.mark.parametrize("domain", ["square", "lshape"])
@pytest.mark.parametrize("k", [1, 2])
def test_c7_talenti(domain, k):
    with budget(7):
        for forcing in rcmp.FORCINGS:
            coarse = rcmp.run_case(domain, forcing, k, n=64)
            fine = rcmp.run_case(domain, forcing, k, n=128)
            for rep in (coarse, fine):
                assert rep.violation <= rep.tolerance, (forcing, rep.violation, rep.tolerance)
            assert fine.tolerance < coarse.tolerance
            assert fine.violation <= coarse.violation + 1e-15


# ---------------------------------------------------------------- 8. interpolation verification

@pytest.mark.criterion(8)
@pytest.mark.parametrize("theta", [1 / 5, 2 / 5])
def test_c8_interpolation(theta):
    with budget(8):
        rep = vh.verify_radial_interpolation(5, 1, theta, family="all")
        fams = rep.extra["families"]
        assert len(fams) == 4
        assert rep.passed
        assert rep.min_ratio > 0
        for s in fams.values():
            assert s["min_ratio"] > 0
            assert s["drift"] < 0.05
            assert s["dilation_spread"] <= 1e-6


# ---------------------------------------------------------------- 9. theta-scan degeneracy

@pytest.mark.criterion(9)
def test_c9_degenerating_family_drop():
    with budget(9):
        rep = vh.theta_scan(5, 1, family="shell", thetas=[0.1])
        assert rep.rows[0]["decade_drop"] >= 10


@pytest.mark.criterion(9)
def test_c9_admissible_theta_stable():
    with budget(9):
        rep = vh.theta_scan(5, 1, family="shell", thetas=[0.2])
        assert rep.rows[0]["decade_spread"] < 2


# ---------------------------------------------------------------- 10. Lorentz suite

GATE_CASES = [
    ((5, 4, 1.5, 7.5, 0.2), "2 <= q"),
    ((5, 3, 3.5, 17.5, 0.2), "q <= p"),
    ((5, 5, 2, 10, 0.2), "p < N"),
    ((5, 4, 2, 9, 0.2), "r = Nq/(N-p)"),
    ((5, 4, 2, 10, 0.1), "theta >= (N-p)/N"),
    ((5, 4, 2, 10, 0.45), "theta <= p/(Nq)"),
    ((7, 4, 3, 7, 0.43), "r <= min{Np/(N-p)^2, Np/(N-p)}"),
    ((9, 4.5, 2, 4, 0.5), "r >= max{N/(N-p), p}"),
]


@pytest.mark.criterion(10)
def test_c10_gate_constraints():
    from ineqforge.errors import DomainError
    with budget(10):
        for args, name in GATE_CASES:
            with pytest.raises(DomainError) as exc:
                vh.admissible_params(*args)
            assert exc.value.constraint == name


@pytest.mark.criterion(10)
def test_c10_lorentz_N5_p3():
    with budget(10):
        N, p, q = 5, 3, 2
        r = N * q / (N - p)
        rep = vh.verify_lorentz_interpolation(N, p, q, r, (N - p) / N)
        assert rep.passed
        assert all(row["ratio"] > 0 for row in rep.rows if row.get("ratio") is not None)


@pytest.mark.criterion(10)
@pytest.mark.parametrize("N,p,q,r,theta", [(5, 4, 2, 10, 0.2), (5, 4, 2, 10, 0.4), (5, 4, 4, 20, 0.2)])
def test_c10_lorentz_admissible_runs(N, p, q, r, theta):
    with budget(10):
        rep = vh.verify_lorentz_interpolation(N, p, q, r, theta)
        assert rep.passed
        ratios = [row["ratio"] for row in rep.rows if row.get("ratio") is not None]
        assert ratios and all(x > 0 for x in ratios)


@pytest.mark.criterion(10)
@pytest.mark.parametrize("N,p_star,r", [(5, 4.0, 2.0), (5, 20.0, 10.0), (5, 10 / 3, 2.5), (7, 3.5, 7.0)])
def test_c10_indicator_oracle(N, p_star, r):
    with budget(10):
        vol = rc.ball_volume(N)
        oracle = (p_star / r) ** (1 / r) * vol ** (1 / p_star)
        got = nm.lorentz_norm(nm.indicator_profile(), N, p_star, r).value
        assert rel(got, oracle) <= 1e-5


# ---------------------------------------------------------------- 11. determinism

REPLAY = [
    (["constants", "--N", "7", "--m", "1"], ".json"),
    (["verify", "--theorem", "radial-even", "--N", "5", "--m", "1", "--theta", "0.2",
      "--family", "all", "--no-refine"], ".json"),
    (["verify", "--theorem", "lorentz", "--N", "5", "--m", "1", "--p", "4", "--q", "2",
      "--r", "10", "--theta", "0.2"], ".csv"),
    (["scan-theta", "--N", "5", "--m", "1", "--thetas", "0.1,0.2,0.4"], ".json"),
    (["talenti", "--domain", "lshape", "--forcing", "bump", "--k", "2", "--n", "32"], ".json"),
    (["estimate", "--N", "5", "--m", "1", "--theta", "0.2", "--family", "rational",
      "--budget", "60", "--starts", "2", "--seed", "7"], ".csv"),
    (["deficit", "--N", "5", "--m", "1", "--theta", "0.3", "--profile", "rational:a=2"], ".json"),
]


@pytest.mark.criterion(11)
@pytest.mark.parametrize("argv,ext", REPLAY, ids=[a[0][0] + e for a, e in zip(REPLAY, [x[1] for x in REPLAY])])
def test_c11_config_replay(tmp_path, argv, ext):
    out = tmp_path / ("report" + ext)
    assert cli.run(argv + ["--out", str(out)]) in (0, 1)
    saved = tmp_path / ("saved" + ext)
    shutil.copy(out, saved)
    out.unlink()
    assert cli.run(["--config", str(saved)]) in (0, 1)
    assert out.read_bytes() == saved.read_bytes()
