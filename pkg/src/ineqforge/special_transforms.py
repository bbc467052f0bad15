"""Bessel functions, radial Fourier transforms and radial-derivative bounds.

Bessel functions of the first kind are evaluated here directly:

* power series for x <= 8,
* Miller backward recurrence with a Neumann-sum normalisation for 8 < x < 30,
* Hankel's asymptotic expansion for the two lowest orders followed by
  forward recurrence for x >= 30 (stable since nu <= 25 < x).

The radial Fourier transform of u(x) = U(|x|) in R^N is

    F_N(u)(rho) = 2 pi rho^{-(N-2)/2} int_0^inf U(s) J_{(N-2)/2}(2 pi rho s) s^{N/2} ds
                = (2 pi)^{N/2} int_0^inf U(s) Lambda_nu(2 pi rho s) s^{N-1} ds,

with Lambda_nu(z) = J_nu(z) z^{-nu}, which is regular at rho = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import AccuracyError, DomainError, ResolutionError, UnsupportedOrderError
from .radial_core import (
    RadialProfile,
    derivative,
    evaluate,
    integrate,
    iterated_laplacian,
    make_grid,
    over_r,
    sphere_area,
    squared_integral,
    times_power,
)

NU_MAX = 25.0
SERIES_X = 8.0
ASYMPTOTIC_X = 30.0


def _series(nu: float, x: np.ndarray, scaled: bool) -> np.ndarray:
    """sum_k (-x^2/4)^k / (k! Gamma(nu+k+1)), times (x/2)^nu unless scaled.

    With ``scaled`` the result is J_nu(x) x^{-nu}.
    """
    q = -0.25 * x * x
    term = np.full(x.shape, math.exp(-gammaln(nu + 1.0)))
    total = term.copy()
    for k in range(1, 200):
        term = term * q / (k * (nu + k))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total) + 1e-300):
            break
    if scaled:
        return total * 0.5 ** nu
    return total * (0.5 * x) ** nu


def _hankel_pq(nu: float, x: np.ndarray):
    mu = 4.0 * nu * nu
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    term = np.ones_like(x)
    prev = np.full(x.shape, np.inf)
    active = np.ones(x.shape, bool)
    for k in range(1, 60):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        mag = np.abs(term)
        active &= mag < prev
        t = np.where(active, term, 0.0)
        if k % 2 == 1:
            Q += (-1) ** ((k - 1) // 2) * t
        else:
            P += (-1) ** (k // 2) * t
        prev = mag
        if not np.any(active & (mag > 1e-17)):
            break
    return P, Q


def _hankel(nu: float, x: np.ndarray) -> np.ndarray:
    P, Q = _hankel_pq(nu, x)
    chi = x - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (P * np.cos(chi) - Q * np.sin(chi))


def _forward(nu0: float, n: int, x: np.ndarray) -> np.ndarray:
    j0 = _hankel(nu0, x)
    if n == 0:
        return j0
    j1 = _hankel(nu0 + 1.0, x)
    for k in range(1, n):
        j0, j1 = j1, 2.0 * (nu0 + k) / x * j1 - j0
    return j1


def _miller(nu0: float, n: int, x: np.ndarray) -> np.ndarray:
    M = max(n, int(1.2 * float(np.max(x)))) + 60
    M += M % 2
    jp1 = np.zeros_like(x)
    j = np.full(x.shape, 1e-30)
    keep = np.zeros_like(x)
    norm = np.zeros_like(x)
    for k in range(M, 0, -1):
        if k % 2 == 0:
            h = k // 2
            norm += (nu0 + k) * math.exp(gammaln(nu0 + h) - gammaln(h + 1.0)) * j
        if k == n:
            keep = j.copy()
        jm1 = 2.0 * (nu0 + k) / x * j - jp1
        jp1, j = j, jm1
        big = np.abs(j) > 1e250
        if np.any(big):
            for arr in (j, jp1, keep, norm):
                arr[big] *= 1e-250
    if n == 0:
        keep = j
    norm += math.exp(gammaln(nu0 + 1.0)) * j
    return keep * (0.5 * x) ** nu0 / norm


def _check_order(nu):
    nu = float(nu)
    if nu < 0:
        raise DomainError(f"Bessel order must be nonnegative, got {nu}", "nu >= 0")
    if nu > NU_MAX:
        raise UnsupportedOrderError(f"Bessel order {nu} exceeds ceiling {NU_MAX}")
    return nu


def bessel_j(nu: float, x) -> np.ndarray:
    """J_nu(x) for 0 <= nu <= 25 and x >= 0."""
    nu = _check_order(nu)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0):
        raise DomainError("Bessel argument must be nonnegative", "x >= 0")
    out = np.empty_like(x)
    n = int(math.floor(nu))
    nu0 = nu - n
    a = x <= SERIES_X
    c = x >= ASYMPTOTIC_X
    b = ~(a | c)
    if np.any(a):
        out[a] = _series(nu, x[a], False)
    if np.any(b):
        out[b] = _miller(nu0, n, x[b])
    if np.any(c):
        out[c] = _forward(nu0, n, x[c])
    return out[0] if scalar else out


def bessel_j_scaled(nu: float, z) -> np.ndarray:
    """Lambda_nu(z) = J_nu(z) z^{-nu}, finite at z = 0."""
    nu = _check_order(nu)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    small = z <= SERIES_X
    out[small] = _series(nu, z[small], True)
    if np.any(~small):
        out[~small] = bessel_j(nu, z[~small]) * z[~small] ** (-nu)
    return out


def bessel_bound_constant(nu: float, s) -> float:
    """max |J_nu(s)| (1+s)^{nu+1/2} / s^nu over the samples s > 0."""
    s = np.asarray(s, dtype=float)
    return float(np.max(np.abs(bessel_j_scaled(nu, s)) * (1.0 + s) ** (nu + 0.5)))


# ---------------------------------------------------------------------------
# radial Fourier transform
# ---------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)
MAX_PANELS = 400_000


@dataclass(frozen=True)
class SpectralProfile:
    """Samples F_N(u)(rho) at the given frequencies."""

    frequencies: np.ndarray
    values: np.ndarray
    N: int


def _support(U: RadialProfile, N: float, rho: float, rtol: float = 1e-15):
    """Node range outside which the integrand envelope
    |U| s^{N-1} (1 + 2 pi rho s)^{-(N-1)/2} is below ``rtol`` of its peak."""
    r = U.r
    env = np.abs(U.values) * r ** (N - 1.0) * (1.0 + 2.0 * math.pi * rho * r) ** (-(N - 1) / 2.0)
    top = np.max(env)
    if top == 0.0:
        return None
    idx = np.nonzero(env > rtol * top)[0]
    lo = max(idx[0] - 2, 0)
    hi = min(idx[-1] + 2, U.grid.n - 1)
    return lo, hi


def _panels(U: RadialProfile, lo: int, hi: int, rho: float) -> np.ndarray:
    r = U.r
    base = r[lo:hi + 1:8]
    if base[-1] != r[hi]:
        base = np.append(base, r[hi])
    if lo == 0:
        base = np.insert(base, 0, 0.0)
    if rho <= 0.0:
        return base
    width = 1.0 / (4.0 * rho)
    counts = np.maximum(1, np.ceil(np.diff(base) / width).astype(int))
    if counts.sum() > MAX_PANELS:
        raise ResolutionError(
            f"frequency {rho:g} needs {counts.sum()} panels over r <= {r[hi]:g}; "
            "reduce rho or the support of the profile")
    pieces = [np.linspace(a, b, c + 1)[:-1] for a, b, c in zip(base[:-1], base[1:], counts)]
    return np.append(np.concatenate(pieces), base[-1])


def fourier_radial(U: RadialProfile, N: int, rho_samples) -> SpectralProfile:
    """F_N(u)(rho) by panel Gauss-Legendre quadrature with panels of width
    at most 1/(4 rho), aligned to every 8th grid node.

    Off-grid values of U come from local interpolation; the part of (0,
    r_min) below the grid is taken with U frozen at U(r_min).  At rho = 0
    the transform is the plain radial integral, tails included.
    """
    if N < 1:
        raise DomainError("dimension must be positive", "N >= 1")
    rho = np.atleast_1d(np.asarray(rho_samples, dtype=float))
    if np.any(rho < 0):
        raise DomainError("frequencies must be nonnegative", "rho >= 0")
    nu = (N - 2) / 2.0
    pref = (2.0 * math.pi) ** (N / 2.0)
    lam0 = float(bessel_j_scaled(nu, 0.0)[0])
    out = np.zeros_like(rho)
    u0 = U.values[0]
    for i, q in enumerate(rho):
        if q == 0.0:
            # no oscillation: the radial integral with its power-law tails
            g = U.values * U.r ** (N - 1.0)
            out[i] = pref * lam0 * integrate(U.grid, g).value
            continue
        sup = _support(U, N, q)
        if sup is None:
            continue
        lo, hi = sup
        edges = _panels(U, lo, hi, q)
        a, b = edges[:-1], edges[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        s = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        w = (half[:, None] * _GL_W[None, :]).ravel()
        vals = evaluate(U, s)
        if lo == 0:
            vals = np.where(s < U.grid.r_min, u0, vals)
        kern = bessel_j_scaled(nu, 2.0 * math.pi * q * s)
        out[i] = pref * np.sum(w * vals * kern * s ** (N - 1))
    return SpectralProfile(rho, out, N)


def dimension_shift_check(U: RadialProfile, N: int, rho_samples) -> float:
    """max over rho of |F_{N+2}(v) + 2 pi F_N(u)| / max |2 pi F_N(u)|,
    with v(x) = V(|x|) in R^{N+2} and V = U'/r."""
    V = over_r(U)
    lhs = fourier_radial(V, N + 2, rho_samples).values
    rhs = 2.0 * math.pi * fourier_radial(U, N, rho_samples).values
    scale = np.max(np.abs(rhs))
    if scale == 0.0:
        return float(np.max(np.abs(lhs)))
    return float(np.max(np.abs(lhs + rhs)) / scale)


def frequency_grid(n: int = 1024, lo: float = 1e-3, hi: float = 1e3):
    return make_grid("log-uniform", lo, hi, n)


def seminorm_via_fourier(U: RadialProfile, N: int, sigma: float, n_freq: int = 1024,
                         strict: bool = True) -> float:
    """(2 pi)^{2 sigma} |S^{N-1}| int rho^{N-1+2 sigma} |F_N(u)(rho)|^2 d rho.

    Frequencies run over a log-uniform grid on [1e-3, 1e3]; evaluation stops
    once the integrand has dropped below 1e-17 of the running total for 16
    consecutive nodes.  Tails outside the frequency range use the power-law
    corrections of :func:`integrate`.
    """
    if sigma < 0 or 2 * sigma >= N:
        raise DomainError(f"requires 0 <= 2 sigma < N (got sigma={sigma}, N={N})", "2 sigma < N")
    fg = frequency_grid(n_freq)
    rho = fg.nodes
    vals = np.zeros_like(rho)
    quiet = 0
    block = 32
    for start in range(0, rho.size, block):
        sl = slice(start, min(start + block, rho.size))
        vals[sl] = fourier_radial(U, N, rho[sl]).values
        g = vals[:sl.stop] ** 2 * rho[:sl.stop] ** (N + 2 * sigma)
        total = np.sum(g)
        tail = g[-block:]
        if total > 0 and np.all(tail < 1e-17 * total):
            quiet += 1
            if quiet >= 1 and start > 0:
                break
    res = squared_integral(vals, fg, N - 1 + 2 * sigma)
    if strict and res.flags:
        raise AccuracyError(f"frequency tail estimate too large: {res.flags}", res.flags)
    return (2.0 * math.pi) ** (2 * sigma) * sphere_area(N) * res.value


# ---------------------------------------------------------------------------
# radial derivative lower bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LowerBound:
    lhs: float
    rhs: float
    gap_formula: float | None
    eps: float

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs - self.eps


def radial_lower_bound_check(U: RadialProfile, N: int, m: int, parity: str = "even") -> LowerBound:
    """Compare int |Delta^m u|^2 with |S| int |U^{(2m)}|^2 r^{N-1} dr (even)
    or int |grad Delta^m u|^2 with |S| int |U^{(2m+1)}|^2 r^{N-1} dr (odd).

    For even m = 1 the exact gap |S| (N-1) int |U'|^2 r^{N-3} dr is returned
    as ``gap_formula``.
    """
    if parity == "even":
        if m < 1 or N < 2 * m - 1:
            raise DomainError(f"requires N >= 2m - 1 (got N={N}, m={m})", "N >= 2m - 1")
        L = iterated_laplacian(U, N, m)
        k = 2 * m
    elif parity == "odd":
        if m < 0 or N < 2 * m:
            raise DomainError(f"requires N >= 2m (got N={N}, m={m})", "N >= 2m")
        L = derivative(iterated_laplacian(U, N, m), 1)
        k = 2 * m + 1
    else:
        raise DomainError(f"unknown parity {parity!r}", "parity")
    S = sphere_area(N)
    grid = U.grid
    lhs = S * squared_integral(L.values, grid, N - 1).value
    rhs = S * squared_integral(derivative(U, k).values, grid, N - 1).value
    gap = None
    if parity == "even" and m == 1:
        gap = S * (N - 1) * squared_integral(derivative(U, 1).values, grid, N - 3).value
    return LowerBound(lhs, rhs, gap, 1e-8 * abs(lhs))


@dataclass(frozen=True)
class RecursionCheck:
    """Both integral recursions for U' = r V.

    odd:  int |U^{(2k+1)}|^2 r^{N-1} = int |V^{(2k)}|^2 r^{N+1} + 2k(2k-N) int |V^{(2k-1)}|^2 r^{N-1}
    even: int |U^{(2k+2)}|^2 r^{N-1} = int |V^{(2k+1)}|^2 r^{N+1} + (2k+1)(2k+1-N) int |V^{(2k)}|^2 r^{N-1}
    """

    lhs: float
    rhs: float
    lhs_next: float
    rhs_next: float
    leading: float

    @property
    def error(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.lhs), abs(self.rhs), 1e-300)

    @property
    def error_next(self) -> float:
        return abs(self.lhs_next - self.rhs_next) / max(abs(self.lhs_next), abs(self.rhs_next), 1e-300)


def recursion_identity_check(V: RadialProfile, N: int, k: int) -> RecursionCheck:
    """Integral recursions of the radial lower bound, with U' = r V.

    The left sides differentiate r V directly; the right sides use the
    derivatives of V alone.
    """
    if k < 1:
        raise DomainError("recursion needs k >= 1", "k >= 1")
    grid = V.grid
    rV = times_power(V, 1.0)
    u_odd = derivative(rV, 2 * k).values
    u_even = derivative(rV, 2 * k + 1).values
    v = {j: derivative(V, j).values for j in (2 * k - 1, 2 * k, 2 * k + 1)}
    sq = lambda a, b: squared_integral(a, grid, b).value  # noqa: E731
    lhs = sq(u_odd, N - 1)
    lead = sq(v[2 * k], N + 1)
    rhs = lead + 2 * k * (2 * k - N) * sq(v[2 * k - 1], N - 1)
    lhs2 = sq(u_even, N - 1)
    c = 2 * k + 1
    rhs2 = sq(v[2 * k + 1], N + 1) + c * (c - N) * sq(v[2 * k], N - 1)
    return RecursionCheck(lhs, rhs, lhs2, rhs2, lead)
