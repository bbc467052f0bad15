"""Talenti comparison on planar domains.

A Navier problem (-Delta)^k u = f on a domain Omega in the square [0, L]^2 is
solved by k nested 5-point finite-difference Poisson solves.  Its Schwarz
rearrangement u* is compared with the radial solution v of the symmetrized
problem on the disk Omega* of equal area, forced by the rearrangement of
|f|.  The comparison principle says u* <= v; on a grid it holds up to a
first-order discretization error.

Grid convention: nodes sit at (i h, j h), i, j = 0..n, with h = L/n.  A node
is an unknown when it lies inside Omega and away from the outer frame; every
other node carries the homogeneous Dirichlet value.  Each unknown stands for
a cell of area h^2, which is the measure used by the discrete rearrangement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre
from scipy import sparse
from scipy.sparse.linalg import cg

from .errors import DomainError, ParameterError, SolverError
from .radial_core import COMPACT, LOG_UNIFORM, RadialProfile, make_grid

CG_RTOL = 1e-10
TOL_FACTOR = 5.0
DOMAINS = ("square", "disk", "lshape")
FORCINGS = ("constant", "bump", "wave")


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Node grid on [0, L]^2 with a membership mask for Omega."""

    L: float
    n: int
    mask: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        if self.n < 4 or self.L <= 0:
            raise ParameterError("need n >= 4 and L > 0")
        m = np.array(self.mask, dtype=bool)
        if m.shape != (self.n + 1, self.n + 1):
            raise ParameterError("mask must have shape (n + 1, n + 1)")
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = False
        if not m.any():
            raise ParameterError("domain mask has no interior nodes")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def coords(self):
        x = np.arange(self.n + 1) * self.h
        return np.meshgrid(x, x, indexing="ij")

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def area(self) -> float:
        """Discrete measure of Omega: one cell per unknown."""
        return self.count * self.h * self.h

    @property
    def disk_radius(self) -> float:
        """Radius of the disk with the same discrete area."""
        return math.sqrt(self.area / math.pi)

    def describe(self) -> dict:
        return {"domain": self.name, "L": self.L, "n": self.n, "h": self.h, "unknowns": self.count}


def make_domain(name: str, n: int = 64, L: float = 1.0) -> Grid2D:
    """``square`` (all of [0, L]^2), ``disk`` (inscribed, centre (L/2, L/2))
    or ``lshape`` ([0, L]^2 without its upper-right quarter)."""
    x = np.arange(n + 1) * (L / n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    if name == "square":
        mask = np.ones_like(X, dtype=bool)
    elif name == "disk":
        mask = (X - 0.5 * L) ** 2 + (Y - 0.5 * L) ** 2 < (0.5 * L) ** 2
    elif name == "lshape":
        mask = ~((X >= 0.5 * L) & (Y >= 0.5 * L))
    else:
        raise ParameterError(f"unknown domain {name!r}; expected one of {DOMAINS}")
    return Grid2D(L, n, mask, name)


@dataclass(frozen=True, eq=False)
class Field2D:
    """Nodal values on a Grid2D; zero outside the domain."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.mask.shape:
            raise ParameterError("field shape does not match the grid")
        v[~self.grid.mask] = 0.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def interior(self) -> np.ndarray:
        return self.values[self.grid.mask]

    def __add__(self, other: "Field2D") -> "Field2D":
        return Field2D(self.grid, self.values + other.values)

    def __mul__(self, c: float) -> "Field2D":
        return Field2D(self.grid, float(c) * self.values)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l2(self) -> float:
        return float(math.sqrt(np.sum(self.interior ** 2)) * self.grid.h)


def forcing(name: str, grid: Grid2D) -> Field2D:
    """Named test forcings: ``constant`` (1), ``bump`` (an off-centre
    Gaussian) and ``wave`` (a sign-changing product of sines plus 1/2)."""
    X, Y = grid.coords
    L = grid.L
    if name == "constant":
        v = np.ones_like(X)
    elif name == "bump":
        v = np.exp(-((X - 0.3 * L) ** 2 + (Y - 0.35 * L) ** 2) / (0.02 * L * L))
    elif name == "wave":
        v = np.sin(3 * math.pi * X / L) * np.sin(2 * math.pi * Y / L) + 0.5
    else:
        raise ParameterError(f"unknown forcing {name!r}; expected one of {FORCINGS}")
    return Field2D(grid, v)


# ---------------------------------------------------------------------------
# finite-difference solves
# ---------------------------------------------------------------------------

def _laplacian(grid: Grid2D):
    """Sparse -Delta_h on the unknowns (5-point stencil, Dirichlet zero)."""
    idx = -np.ones(grid.mask.shape, dtype=np.int64)
    idx[grid.mask] = np.arange(grid.count)
    I, J = np.nonzero(grid.mask)
    rows = [idx[I, J]]
    cols = [idx[I, J]]
    data = [np.full(I.size, 4.0)]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb = idx[I + di, J + dj]
        ok = nb >= 0
        rows.append(idx[I, J][ok])
        cols.append(nb[ok])
        data.append(np.full(ok.sum(), -1.0))
    A = sparse.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(grid.count, grid.count))
    return A / (grid.h * grid.h)


def solve_poisson_2d(f: Field2D, rtol: float = CG_RTOL, maxiter: int | None = None) -> Field2D:
    """-Delta_h u = f in Omega, u = 0 elsewhere.

    Conjugate gradients with a diagonal (Jacobi) preconditioner until the
    residual is below ``rtol`` times |f|.  Raises :class:`SolverError` with
    the residual history on non-convergence.
    """
    grid = f.grid
    b = f.interior
    if not np.any(b):
        return Field2D(grid, np.zeros(grid.mask.shape))
    A = _laplacian(grid)
    dinv = 1.0 / A.diagonal()
    M = sparse.diags(dinv)
    history = []
    bnorm = float(np.linalg.norm(b))

    def track(xk):
        history.append(float(np.linalg.norm(b - A @ xk)) / bnorm)

    maxiter = maxiter if maxiter is not None else 20 * grid.n + 200
    x, info = cg(A, b, rtol=rtol, atol=0.0, M=M, maxiter=maxiter, callback=track)
    res = float(np.linalg.norm(b - A @ x)) / bnorm
    if info != 0 or res > 10 * rtol:
        raise SolverError(f"CG stopped with relative residual {res:.3e} (info={info})", history)
    out = np.zeros(grid.mask.shape)
    out[grid.mask] = x
    return Field2D(grid, out)


def polyharmonic_levels(f: Field2D, k: int) -> list:
    """[u_0, u_1, ..., u_k] with u_k = f and -Delta u_{i-1} = u_i, all with
    zero Navier data; u_0 solves (-Delta)^k u = f."""
    if k not in (1, 2, 3):
        raise DomainError(f"k must be 1, 2 or 3 (got {k})", "k in {1,2,3}")
    levels = [f]
    for _ in range(k):
        levels.append(solve_poisson_2d(levels[-1]))
    return levels[::-1]


def polyharmonic_navier_2d(f: Field2D, k: int) -> Field2D:
    """(-Delta)^k u = f with (-Delta)^i u = 0 on the boundary, i < k."""
    return polyharmonic_levels(f, k)[0]


# ---------------------------------------------------------------------------
# discrete rearrangement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteRearrangement:
    """Cell values of |u| sorted in decreasing order.

    The k-th value (k = 1, 2, ...) occupies the annulus of areas
    ((k-1) h^2, k h^2) of the disk Omega*; ``radii`` are the radii of the
    mid-areas.
    """

    values: np.ndarray
    radii: np.ndarray
    cell_area: float
    disk_radius: float

    def __call__(self, rho) -> np.ndarray:
        """u*(rho), linear in the enclosed area between mid-area points."""
        a = math.pi * np.asarray(rho, dtype=float) ** 2
        mids = math.pi * self.radii ** 2
        out = np.interp(a, mids, self.values)
        return np.where(np.asarray(rho) > self.disk_radius, 0.0, out)

    def level_area(self, lam: float) -> float:
        return float(np.count_nonzero(self.values > lam)) * self.cell_area


def rearrange_field(u: Field2D) -> DiscreteRearrangement:
    vals = np.sort(np.abs(u.interior))[::-1]
    h2 = u.grid.h ** 2
    k = np.arange(1, vals.size + 1)
    radii = np.sqrt((k - 0.5) * h2 / math.pi)
    return DiscreteRearrangement(vals, radii, h2, u.grid.disk_radius)


def schwarz_2d(u: Field2D, n: int = 1024) -> RadialProfile:
    """Schwarz rearrangement of |u| as a compactly supported radial profile
    on the equal-area disk (log-uniform grid from the first mid-area radius
    to the disk radius, linear in area between cells)."""
    d = rearrange_field(u)
    g = make_grid(LOG_UNIFORM, d.radii[0], d.disk_radius, n)
    flags = (COMPACT, "abs-taken") if np.any(u.interior < 0) else (COMPACT,)
    return RadialProfile(g, d(g.nodes), (), flags)


# ---------------------------------------------------------------------------
# radial nested solves
# ---------------------------------------------------------------------------

class _Panels:
    """Piecewise Legendre representation on [0, R] for exact cumulative
    integrals of piecewise polynomials."""

    def __init__(self, R: float, panels: int = 256, order: int = 16):
        self.edges = np.linspace(0.0, R, panels + 1)
        x, _ = legendre.leggauss(order)
        self.x = x
        self.a = self.edges[:-1]
        self.half = 0.5 * np.diff(self.edges)
        self.nodes = (self.a + self.half)[:, None] + self.half[:, None] * x[None, :]
        V = legendre.legvander(x, order - 1)
        self.Vinv = np.linalg.inv(V)
        self.order = order

    def _antiderivative(self, vals: np.ndarray) -> np.ndarray:
        coef = vals @ self.Vinv.T
        return legendre.legint(coef, lbnd=-1.0, axis=1) * self.half[:, None]

    def cumulative(self, vals: np.ndarray) -> np.ndarray:
        """int_0^r vals at every node (vals has shape (panels, order))."""
        anti = self._antiderivative(vals)
        at_nodes = legendre.legvander(self.x, anti.shape[1] - 1) @ anti.T
        ends = np.sum(anti, axis=1)  # P_j(1) = 1
        offset = np.concatenate([[0.0], np.cumsum(ends)[:-1]])
        return at_nodes.T + offset[:, None]

    def total(self, vals: np.ndarray) -> float:
        return float(np.sum(self._antiderivative(vals)))

    def evaluate(self, vals: np.ndarray, rho) -> np.ndarray:
        """The panel polynomials through ``vals`` at arbitrary radii in [0, R]."""
        rho = np.asarray(rho, dtype=float)
        i = np.clip(np.searchsorted(self.edges, rho, side="right") - 1, 0, self.a.size - 1)
        x = (rho - self.a[i]) / self.half[i] - 1.0
        coef = vals @ self.Vinv.T
        V = legendre.legvander(x, self.order - 1)
        return np.sum(V * coef[i], axis=1)


def radial_navier_levels(forcing_fn, R: float, k: int, N: int = 2, panels: int = 256):
    """Radial Navier solve on the ball of radius R.

    Returns (panels, levels) where levels = [v_0, ..., v_k], v_k = forcing and

        v_{j-1}(r) = int_r^R s^{1-N} int_0^s v_j(t) t^{N-1} dt ds,

    the radial solution of -Delta v_{j-1} = v_j with v_{j-1}(R) = 0.  Each
    level is sampled on the Gauss nodes of ``panels`` equal panels and is
    integrated exactly when it is a polynomial of degree below 16 on each
    panel.
    """
    P = _Panels(R, panels)
    r = P.nodes
    levels = [np.asarray(forcing_fn(r), dtype=float)]
    for _ in range(k):
        inner = P.cumulative(levels[-1] * r ** (N - 1))
        g = inner * r ** (1 - N)
        outer = P.total(g) - P.cumulative(g)
        levels.append(outer)
    return P, levels[::-1]


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

@dataclass
class TalentiReport:
    domain: str
    forcing: str
    k: int
    n: int
    h: float
    violation: float
    tolerance: float
    level_violations: list
    v_max: float
    u_max: float
    disk_radius: float
    convention: str = "forcing rearranged from |f|"
    fields: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return self.violation <= self.tolerance and all(
            v <= self.tolerance for v in self.level_violations)

    def to_dict(self, with_fields: bool = False) -> dict:
        out = {k: getattr(self, k) for k in (
            "domain", "forcing", "k", "n", "h", "violation", "tolerance", "level_violations",
            "v_max", "u_max", "disk_radius", "convention")}
        out["passed"] = self.passed
        if with_fields:
            out["fields"] = {k: np.asarray(v).tolist() for k, v in self.fields.items()}
        return out


def tolerance_grid(h: float, v_max: float) -> float:
    """5 h (|v|_inf + 1)."""
    return TOL_FACTOR * h * (v_max + 1.0)


def talenti_check(f: Field2D, k: int, forcing_name: str = "custom") -> TalentiReport:
    """max over Omega* of u* - v for the Navier problem of order k.

    Every intermediate level is compared too: u_j* <= v_j, j = 0..k-1.
    """
    grid = f.grid
    levels = polyharmonic_levels(f, k)
    fstar = rearrange_field(f)
    R = grid.disk_radius
    P, vlev = radial_navier_levels(fstar, R, k)
    v_max = float(np.max(np.abs(vlev[0])))
    tol = tolerance_grid(grid.h, v_max)
    viol = []
    for j in range(k):
        us = rearrange_field(levels[j])
        v_at = P.evaluate(vlev[j], us.radii)
        viol.append(float(np.max(us.values - v_at)))
    us0 = rearrange_field(levels[0])
    fields = {"rho": us0.radii, "u_star": us0.values,
              "v": P.evaluate(vlev[0], us0.radii)}
    return TalentiReport(grid.name, forcing_name, k, grid.n, grid.h, viol[0], tol, viol[1:],
                         v_max, levels[0].max_abs(), R, fields=fields)


def run_case(domain: str, forcing_name: str, k: int, n: int = 64) -> TalentiReport:
    grid = make_domain(domain, n)
    return talenti_check(forcing(forcing_name, grid), k, forcing_name)


def disk_constant_solution(R: float, rho, k: int = 1, N: int = 2) -> np.ndarray:
    """Navier solution on the ball of radius R for the forcing 1.

    k = 1: (R^2 - r^2)/(2N)
    k = 2: (R^2 - r^2) R^2/(4N^2) - (R^4 - r^4)/(8N(N+2))
    """
    rho = np.asarray(rho, dtype=float)
    if k == 1:
        return (R * R - rho ** 2) / (2.0 * N)
    if k == 2:
        return (R * R - rho ** 2) * R * R / (4.0 * N * N) - (R ** 4 - rho ** 4) / (8.0 * N * (N + 2.0))
    raise ParameterError("closed form available for k = 1, 2")
