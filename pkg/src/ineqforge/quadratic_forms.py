"""Quadratic forms of the Hardy-Rellich family and their remainder identities.

For a radial u(x) = U(|x|) every form is a one-dimensional integral with
the measure |S^{N-1}| r^{N-1} dr.  The leading forms are

    even order:  A = int |Delta^m u|^2 dx,      B = C1(N,m) int u^2 |x|^{-4m} dx
    odd order:   A = int |grad Delta^m u|^2 dx, B = C2(N,m) int u^2 |x|^{-4m-2} dx

and the interpolation quantity is (A - B)^theta (int u^2 |x|^{-4m})^{1-theta}
(the weighted integral enters without the constant).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import sharp_constants as sc
from .errors import AccuracyError, DomainError
from .radial_core import (
    RadialProfile,
    derivative,
    integrate,
    iterated_laplacian,
    over_r,
    power_integral,
    sphere_area,
    squared_integral,
    times_power,
)

TOL_IDENTITY = 1e-7
TOL_IDENTITY_COARSE = 1e-5
EPS_QUAD_REL = 1e-8


def identity_tolerance(n_nodes: int) -> float:
    """1e-7 on 2048-node grids and finer, 1e-5 on coarser ones."""
    return TOL_IDENTITY if n_nodes >= 2048 else TOL_IDENTITY_COARSE


def check_even(N, m):
    if m < 1 or N <= 4 * m:
        raise DomainError(f"requires N > 4m (got N={N}, m={m})", "N > 4m")


def check_odd(N, m):
    if m < 0 or N <= 4 * m + 2:
        raise DomainError(f"requires N > 4m + 2 (got N={N}, m={m})", "N > 4m + 2")


class _Flags:
    """Collects integral flags and tail errors."""

    def __init__(self):
        self.flags = []
        self.tail_error = 0.0

    def add(self, res, label):
        self.tail_error += res.tail_error
        self.flags.extend(f"{label}:{f}" for f in res.flags)
        return res.value


@dataclass
class DeficitReport:
    """Values of the leading form A, the weighted form B and their deficit.

    ``weighted`` is int u^2 |x|^{-w} dx without the sharp constant;
    ``interpolation_value`` is max(deficit, 0)^theta * weighted^{1-theta}.
    """

    A: float
    B: float
    deficit: float
    weighted: float
    theta: float | None
    interpolation_value: float | None
    N: int
    m: int
    parity: str
    constant: float
    identity_rhs: float | None = None
    eps_quad: float = 0.0
    case: str | None = None
    tail_error: float = 0.0
    flags: list = field(default_factory=list)

    @property
    def nonnegative(self) -> bool:
        return self.deficit >= -self.eps_quad

    def to_dict(self) -> dict:
        return asdict(self)


def interpolation_value(deficit, weighted, theta) -> float:
    if weighted == 0.0 and deficit == 0.0:
        return 0.0
    return max(deficit, 0.0) ** theta * weighted ** (1.0 - theta)


def _finish(A, weighted, const, theta, N, m, parity, fl, strict):
    S = sphere_area(N)
    A *= S
    weighted *= S
    B = const * weighted
    deficit = A - B
    if strict and fl.flags:
        raise AccuracyError(f"tail bound exceeded: {fl.flags}", fl.flags)
    rep = DeficitReport(A=A, B=B, deficit=deficit, weighted=weighted, theta=theta,
                        interpolation_value=None, N=N, m=m, parity=parity, constant=const,
                        eps_quad=EPS_QUAD_REL * abs(A), tail_error=S * fl.tail_error,
                        flags=list(fl.flags))
    if theta is not None:
        rep.interpolation_value = interpolation_value(deficit, weighted, theta)
        rep.case = "case1" if (1.0 - theta) * A >= B else "case2"
    return rep


def deficit_even(u: RadialProfile, N: int, m: int, theta: float | None = None,
                 strict: bool = True) -> DeficitReport:
    """A = int |Delta^m u|^2, B = C1(N,m) int u^2 |x|^{-4m}."""
    check_even(N, m)
    fl = _Flags()
    L = iterated_laplacian(u, N, m)
    A = fl.add(squared_integral(L.values, u.grid, N - 1), "A")
    W = fl.add(squared_integral(u.values, u.grid, N - 1 - 4 * m), "B")
    fl.flags.extend(L.flags)
    return _finish(A, W, sc.c1(N, m), theta, N, m, "even", fl, strict)


def deficit_odd(u: RadialProfile, N: int, m: int, theta: float | None = None,
                strict: bool = True) -> DeficitReport:
    """A = int |grad Delta^m u|^2, B = C2(N,m) int u^2 |x|^{-4m-2}.

    For m = 0 the first-order ground-state identity is attached as
    ``identity_rhs``.
    """
    check_odd(N, m)
    fl = _Flags()
    L = derivative(iterated_laplacian(u, N, m), 1)
    A = fl.add(squared_integral(L.values, u.grid, N - 1), "A")
    W = fl.add(squared_integral(u.values, u.grid, N - 3 - 4 * m), "B")
    fl.flags.extend(L.flags)
    rep = _finish(A, W, sc.c2(N, m), theta, N, m, "odd", fl, strict)
    if m == 0:
        rep.identity_rhs = groundstate_identity_1st(u, N, 0, strict=strict)[1]
    return rep


def groundstate_identity_2nd(v: RadialProfile, N: int, strict: bool = True):
    """Both sides of

        int |Delta v|^2 - (N^2/4) int |grad v|^2 / |x|^2 = |S^{N-1}| int r |f'|^2 dr

    with w = v'/r and f = w r^{N/2}.  Returns (lhs, rhs).
    """
    fl = _Flags()
    S = sphere_area(N)
    L = iterated_laplacian(v, N, 1)
    d1 = derivative(v, 1)
    a = fl.add(squared_integral(L.values, v.grid, N - 1), "lap")
    b = fl.add(squared_integral(d1.values, v.grid, N - 3), "grad")
    w = over_r(v)
    f = times_power(w, N / 2.0)
    fp = derivative(f, 1)
    c = fl.add(squared_integral(fp.values, v.grid, 1), "rhs")
    if strict and fl.flags:
        raise AccuracyError(f"tail bound exceeded: {fl.flags}", fl.flags)
    return S * (a - N * N / 4.0 * b), S * c


def first_order_weight(m: int, parity: str | None = None) -> float:
    """Exponent c of |x|^{-2c} in the first-order identity.

    even: c = 2m - 1, matching the |x|^{-(4m-2)} gradient weight;
    odd:  c = 2m, so m = 0 is the classical Hardy inequality.
    """
    if parity is None:
        parity = "odd" if m == 0 else "even"
    if parity == "even":
        return 2.0 * m - 1.0
    if parity == "odd":
        return 2.0 * m
    raise DomainError(f"unknown parity {parity!r}", "parity")


def groundstate_identity_1st(u: RadialProfile, N: int, m: int, parity: str | None = None,
                             strict: bool = True):
    """Both sides of

        int |grad u|^2 |x|^{-2c} - ((N-2-2c)^2/4) int u^2 |x|^{-2c-2}
            = |S^{N-1}| int r |f'|^2 dr,      f = u r^{(N-2-2c)/2},

    where c = 2m - 1 for the even chain (weights |x|^{2-4m}, |x|^{-4m}) and
    c = 0 for m = 0 (classical Hardy).  Returns (lhs, rhs).
    """
    c = first_order_weight(m, parity)
    alpha = (N - 2.0 - 2.0 * c) / 2.0
    if alpha <= 0:
        raise DomainError(f"requires N > 2 + 2c (got N={N}, c={c})", "N > 4m")
    fl = _Flags()
    S = sphere_area(N)
    d1 = derivative(u, 1)
    a = fl.add(squared_integral(d1.values, u.grid, N - 1 - 2 * c), "grad")
    b = fl.add(squared_integral(u.values, u.grid, N - 3 - 2 * c), "weighted")
    f = times_power(u, alpha)
    fp = derivative(f, 1)
    rhs = fl.add(squared_integral(fp.values, u.grid, 1), "rhs")
    if strict and fl.flags:
        raise AccuracyError(f"tail bound exceeded: {fl.flags}", fl.flags)
    return S * (a - alpha * alpha * b), S * rhs


@dataclass(frozen=True)
class LineProfile:
    """Samples psi(s) on a uniform grid of the real line."""

    s: np.ndarray
    values: np.ndarray

    @property
    def h(self) -> float:
        return float(self.s[1] - self.s[0])

    def derivative(self) -> np.ndarray:
        from .radial_core import log_derivative_fd
        return log_derivative_fd(self.values, self.h, 1)

    def integral(self, g: np.ndarray) -> float:
        """Gregory-corrected trapezoid integral of samples g over the s-range."""
        from .radial_core import gregory_corrections
        n = g.size
        w = np.full(n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        for j, c in enumerate(gregory_corrections()):
            w[j] += self.h * c
            w[n - 1 - j] += self.h * c
        return float(w @ g)

    def dirichlet(self) -> float:
        d = self.derivative()
        return self.integral(d * d)

    def power(self, kappa: float) -> float:
        return self.integral(np.abs(self.values) ** kappa)


def log_variable_transport(f: RadialProfile) -> LineProfile:
    """psi(s) = f(e^s) on the uniform s-grid underlying a log-uniform grid."""
    f.grid.h  # raises for non log-uniform grids
    return LineProfile(f.grid.s, f.values)


def transport_pairs(f: RadialProfile, kappa: float = 2.0) -> dict:
    """Both sides of int r|f'|^2 dr = int |psi'|^2 ds and
    int |f|^kappa r^{-1} dr = int |psi|^kappa ds (over the grid range)."""
    psi = log_variable_transport(f)
    grid = f.grid
    fp = derivative(f, 1).values
    r = grid.nodes
    return {
        "dirichlet_r": float(grid.weights @ (r * fp * fp)),
        "dirichlet_s": psi.dirichlet(),
        "power_r": float(grid.weights @ (np.abs(f.values) ** kappa / r)),
        "power_s": psi.power(kappa),
    }


# ---------------------------------------------------------------------------
# Bessel pairs and the weighted q-deficit
# ---------------------------------------------------------------------------

def lorentz_bessel_pair(N, p, q):
    """(V exponent, (B coefficient, B exponent), phi exponent) of the pair
    V = r^{N(q/p-1)}, B = ((N-p)/p)^q r^{Nq/p-q-N}, phi = r^{-(N-p)/p}."""
    a = (N - p) / p
    return N * (q / p - 1.0), (abs(a) ** q, N * q / p - q - N), -a


@dataclass(frozen=True)
class PairResidual:
    profile: RadialProfile
    scale: float

    @property
    def relative_max(self) -> float:
        return float(np.max(np.abs(self.profile.values)) / self.scale) if self.scale else 0.0


def bessel_pair_residual(q, N, V_exponent, B_form, phi_exponent, grid=None) -> PairResidual:
    """Pointwise residual of (r^{N-1} V |phi'|^{q-2} phi')' + r^{N-1} B |phi|^{q-2} phi.

    V = r^{V_exponent}, phi = r^{phi_exponent}, B = coef * r^{exponent} with
    ``B_form = (coef, exponent)``.  The flux is sampled and differentiated
    numerically; ``scale`` is the largest magnitude of the two terms.
    """
    from .radial_core import make_grid, profile_from_function

    grid = make_grid("log-uniform", 0.1, 10.0, 512) if grid is None else grid
    r = grid.nodes
    a = float(phi_exponent)
    coef, bexp = B_form
    dphi = a * r ** (a - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = np.where(dphi == 0.0, 0.0 if q > 2 else 1.0, np.abs(dphi) ** (q - 2.0))
    flux = r ** (N - 1.0 + V_exponent) * mag * dphi
    flux_p = derivative(profile_from_function(grid, lambda _: flux), 1, method="fd").values
    phi = r ** a
    zero_term = r ** (N - 1.0) * coef * r ** bexp * np.abs(phi) ** (q - 2.0) * phi
    res = flux_p + zero_term
    scale = float(max(np.max(np.abs(flux_p)), np.max(np.abs(zero_term))))
    return PairResidual(profile_from_function(grid, lambda _: res), scale)


def cp_functional(a, b, p):
    """|a|^p + (p-1)|b|^p - p |a-b|^{p-2} (a-b).b, evaluated as written.

    ``a`` and ``b`` are arrays of vectors along the last axis (or scalars).
    At p = 2 this equals |a-b|^2 + 2|b|^2; it is not the pointwise q = 2
    remainder |a|^2 - |a-b|^2 - 2(a-b).b = |b|^2.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 0:
        a, b = a.reshape(1, 1), b.reshape(1, 1)
        squeeze = True
    else:
        squeeze = False
    na = np.linalg.norm(a, axis=-1)
    nb = np.linalg.norm(b, axis=-1)
    d = a - b
    nd = np.linalg.norm(d, axis=-1)
    dot = np.sum(d * b, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(nd == 0.0, 0.0 if p > 2 else 1.0, nd ** (p - 2.0))
    out = na ** p + (p - 1.0) * nb ** p - p * w * dot
    return out[0] if squeeze else out


@dataclass(frozen=True)
class WeightedDeficit:
    lhs: float
    remainder: float
    c_q: float
    holds: bool
    eps_quad: float


def weighted_deficit_lower_bound(u: RadialProfile, q: float, N: int, p: float,
                                 c_q: float | None = None) -> WeightedDeficit:
    """Weighted q-deficit and its remainder for the Lorentz Bessel pair.

    lhs       = |S| int (V |u'|^q - B |u|^q) r^{N-1} dr
    remainder = |S| int V phi^q |v'|^q r^{N-1} dr,   v = u / phi.

    ``holds`` reports lhs >= c_q * remainder - eps.  c_q defaults to 1 for
    q = 2 (where the two sides coincide) and 0 otherwise, since no explicit
    value is available for q > 2.
    """
    if q < 2:
        raise DomainError(f"requires q >= 2 (got q={q})", "q >= 2")
    if not (1 <= q <= p < N):
        raise DomainError(f"requires q <= p < N (got N={N}, p={p}, q={q})", "q <= p < N")
    Vexp, (bc, bexp), phexp = lorentz_bessel_pair(N, p, q)
    S = sphere_area(N)
    grid = u.grid
    up = derivative(u, 1).values
    t1 = power_integral(up, grid, q, N - 1 + Vexp).value
    t2 = bc * power_integral(u.values, grid, q, N - 1 + bexp).value
    v = times_power(u, -phexp)
    vp = derivative(v, 1).values
    rem = power_integral(vp, grid, q, N - 1 + Vexp + q * phexp).value
    lhs = S * (t1 - t2)
    rem *= S
    if c_q is None:
        c_q = 1.0 if q == 2 else 0.0
    eps = EPS_QUAD_REL * S * t1
    return WeightedDeficit(lhs, rem, c_q, bool(lhs >= c_q * rem - eps), eps)


# name kept for callers of the published API
lemma42_lower_bound = weighted_deficit_lower_bound


# ---------------------------------------------------------------------------
# Hardy-Rellich chain
# ---------------------------------------------------------------------------

@dataclass
class ChainReport:
    """The four chain terms T0 >= T1 >= T2 >= T3 and the link gaps."""

    terms: list
    links: list
    eps: float
    N: int
    m: int
    flags: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(g >= -self.eps for g in self.links)


def hardy_rellich_chain(u: RadialProfile, N: int, m: int) -> ChainReport:
    """T0 = int |Delta^m u|^2, T1 = (N^2/4) int |grad Delta^{m-1} u|^2/|x|^2,
    T2 = (4 C1/(N-4m)^2) int |grad u|^2 / |x|^{4m-2}, T3 = C1 int u^2/|x|^{4m}.
    """
    check_even(N, m)
    S = sphere_area(N)
    grid = u.grid
    fl = _Flags()
    Lm = iterated_laplacian(u, N, m)
    Lm1 = iterated_laplacian(u, N, m - 1)
    g = derivative(Lm1, 1)
    d1 = derivative(u, 1)
    t0 = fl.add(squared_integral(Lm.values, grid, N - 1), "T0")
    t1 = N * N / 4.0 * fl.add(squared_integral(g.values, grid, N - 3), "T1")
    t2 = sc.gradient_chain_even(N, m) * fl.add(squared_integral(d1.values, grid, N - 1 - (4 * m - 2)), "T2")
    t3 = sc.c1(N, m) * fl.add(squared_integral(u.values, grid, N - 1 - 4 * m), "T3")
    terms = [S * t for t in (t0, t1, t2, t3)]
    links = [terms[i] - terms[i + 1] for i in range(3)]
    return ChainReport(terms, links, EPS_QUAD_REL * abs(terms[0]), N, m, fl.flags)


def rayleigh_quotient(u: RadialProfile, N: int, m: int) -> float:
    """int |Delta^m u|^2 / int u^2 |x|^{-4m}."""
    rep = deficit_even(u, N, m, strict=False)
    return rep.A / rep.weighted if rep.weighted else math.inf
