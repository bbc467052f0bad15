"""Rearrangement-invariant and scale-critical norms of radial functions.

Every norm here acts on a :class:`~ineqforge.radial_core.RadialProfile` and
returns a :class:`NormResult` carrying the value, a tuple of accuracy flags
and, for the supremum-type norms, the maximizing parameters.

Conventions
-----------
* omega_N is the volume of the unit ball (see :mod:`sharp_constants`).
* Lorentz:  ||u||_{p*,r} = omega_N^{1/p* - 1/r} (int [u*(x) |x|^{N/p*}]^r dx/|x|^N)^{1/r}
* Morrey:   ||u||_{M^{p,alpha}} = sup_{y,R} (R^{alpha-N} int_{B(y,R)} |u|^p)^{1/p}
* Besov:    ||u||_{B^{-s}} = sup_t t^{s/2} ||K_t * u||_inf,  K_t the heat kernel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import AccuracyWarning, DomainError, ParameterError
from .radial_core import (
    COMPACT,
    RadialProfile,
    evaluate,
    power_integral,
    sphere_area,
)
from .sharp_constants import omega

N_LEVELS = 512
MORREY_GRID = 64
BESOV_T_RANGE = (1e-6, 1e6)
BESOV_T_POINTS = 128
BESOV_X_POINTS = 32
_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class NormResult:
    """A norm value with accuracy flags and, for suprema, the maximizer."""

    value: float
    flags: tuple = ()
    maximizer: dict | None = None

    def __float__(self):
        return float(self.value)

    def to_dict(self) -> dict:
        out = {"value": float(self.value), "flags": list(self.flags)}
        if self.maximizer is not None:
            out["maximizer"] = {k: float(v) for k, v in self.maximizer.items()}
        return out


def _is_zero(u: RadialProfile) -> bool:
    return not np.any(u.values)


def _is_nonincreasing(u: RadialProfile) -> bool:
    v = u.values
    return bool(np.all(v >= 0) and np.all(np.diff(v) <= 0))


def _upper_tail(u: RadialProfile) -> bool:
    return COMPACT not in u.flags


# ---------------------------------------------------------------------------
# rearrangement
# ---------------------------------------------------------------------------

def _crossings(A: RadialProfile, inside, outside, level, iters=52):
    """Bisection in s for the boundary of {A >= level} between two radii."""
    a = np.log(inside)
    b = np.log(outside)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        hit = evaluate(A, np.exp(mid)) >= level
        a = np.where(hit, mid, a)
        b = np.where(hit, b, mid)
    return np.exp(0.5 * (a + b))


def local_maxima(u: RadialProfile, samples: int = 257) -> tuple[np.ndarray, np.ndarray]:
    """Radii and values of the interior local maxima of the interpolant of |U|.

    Each node maximum is refined by sampling the interpolant across its two
    neighbouring cells.
    """
    a = np.abs(u.values)
    j = np.nonzero((a[1:-1] >= a[:-2]) & (a[1:-1] >= a[2:]) & (a[1:-1] > 0))[0] + 1
    if j.size == 0:
        return np.zeros(0), np.zeros(0)
    s = u.grid.s
    t = np.linspace(0.0, 1.0, samples)
    pts = s[j - 1][:, None] + (s[j + 1] - s[j - 1])[:, None] * t[None, :]
    vals = np.abs(evaluate(u, np.exp(pts)))
    k = np.argmax(vals, axis=1)
    rows = np.arange(j.size)
    return np.exp(pts[rows, k]), np.maximum(vals[rows, k], a[j])


def distribution_function(u: RadialProfile, N: float, levels) -> tuple[np.ndarray, tuple]:
    """mu(lambda) = |{|u| >= lambda}| for each positive level.

    The super-level set is located node-wise and its boundary radii are
    refined by bisection on the interpolant of |U|.  Below r_min |U| is taken
    as constant.  Returns (mu, flags); the flag ``truncated-support`` means
    some level set reaches r_max on a profile without compact support.
    """
    levels = np.asarray(levels, dtype=float)
    A = u.abs()
    # local maxima between nodes join the sample set, so that thin level
    # sets around a peak are detected
    rp, ap = local_maxima(u)
    r = np.concatenate([u.r, rp])
    a = np.concatenate([A.values, ap])
    order = np.argsort(r, kind="stable")
    r, a = r[order], a[order]
    n = a.size
    w = omega(N)
    pos = a[None, :] >= levels[:, None]
    prev = np.zeros_like(pos)
    prev[:, 1:] = pos[:, :-1]
    nxt = np.zeros_like(pos)
    nxt[:, :-1] = pos[:, 1:]
    flags = []
    mu = np.zeros(levels.size)

    # lower ends of the level-set intervals
    li, lj = np.nonzero(pos & ~prev)
    low = np.zeros(li.size)
    inner = lj > 0
    if np.any(inner):
        low[inner] = _crossings(A, r[lj[inner]], r[lj[inner] - 1], levels[li[inner]])
    # upper ends
    ui, uj = np.nonzero(pos & ~nxt)
    high = np.full(ui.size, r[-1])
    inner = uj < n - 1
    if np.any(inner):
        high[inner] = _crossings(A, r[uj[inner]], r[uj[inner] + 1], levels[ui[inner]])
    if np.any(~inner) and _upper_tail(u) and a[-1] > 1e-12 * a.max():
        flags.append("truncated-support")
    # both lists are ordered by (level, node), so the pairs line up
    np.add.at(mu, ui, high ** N)
    np.add.at(mu, li, -low ** N)
    return w * mu, tuple(flags)


def decreasing_rearrangement(u: RadialProfile, N: float, n_levels: int = N_LEVELS,
                             refine_steps: int = 8) -> RadialProfile:
    """Schwarz rearrangement u* sampled on the grid of ``u``.

    The distribution function is evaluated on ``n_levels`` equally spaced
    levels together with every node value of |U|.  The radii
    rho(lambda) = (mu(lambda)/omega_N)^{1/N} are inverted by monotone cubic
    interpolation in ln(rho), followed by a few bracketed regula falsi steps
    that re-evaluate the distribution function.  Negative input values are
    replaced by their modulus (flag ``abs-taken``).
    """
    flags = ["rearranged"]
    if np.any(u.values < 0):
        flags.append("abs-taken")
    a = np.abs(u.values)
    if not np.any(a):
        return RadialProfile(u.grid, np.zeros_like(a), (), tuple(flags))
    peaks = local_maxima(u)[1]
    top = float(max(a.max(), peaks.max(initial=0.0)))
    levels = np.unique(np.concatenate([np.linspace(0.0, top, n_levels + 1)[1:], a[a > 0], peaks]))
    mu, fl = distribution_function(u, N, levels)
    flags.extend(fl)
    # mu is nonincreasing in the level; clean up interpolation overshoot
    mu = np.minimum.accumulate(mu)
    rad = (mu / omega(N)) ** (1.0 / N)
    keep = rad > 0
    rad, lev = rad[keep], levels[keep]
    # for repeated radii keep the largest level (upper semicontinuous u*)
    order = np.lexsort((-lev, rad))
    rad, lev = rad[order], lev[order]
    first = np.ones(rad.size, dtype=bool)
    first[1:] = rad[1:] > rad[:-1]
    rad, lev = rad[first], lev[first]
    r = u.r
    out = np.zeros_like(a)
    if rad.size == 1:
        out[r <= rad[0]] = lev[0]
    else:
        xr = np.log(rad)
        with np.errstate(all="ignore"):
            interp = PchipInterpolator(xr, lev, extrapolate=False)
        x = np.log(r)
        mid = (r >= rad[0]) & (r <= rad[-1])
        xm = x[mid]
        # bracket each target radius between two sampled levels, start from
        # the interpolant and tighten by Illinois regula falsi on
        # ln rho(lambda) - ln r
        k = np.clip(np.searchsorted(xr, xm) - 1, 0, xr.size - 2)
        la, lb = lev[k].copy(), lev[k + 1].copy()
        fa, fb = xr[k] - xm, xr[k + 1] - xm
        lam = np.clip(interp(xm), lb, la)
        side = np.zeros(xm.size, dtype=int)
        for _ in range(refine_steps):
            m, _ = distribution_function(u, N, lam)
            with np.errstate(divide="ignore"):
                f = np.log(np.maximum(m, 1e-300) / omega(N)) / N - xm
            low = f < 0
            la = np.where(low, lam, la)
            fa = np.where(low, f, fa)
            lb = np.where(low, lb, lam)
            fb = np.where(low, fb, f)
            fb = np.where(low & (side == 1), 0.5 * fb, fb)
            fa = np.where(~low & (side == -1), 0.5 * fa, fa)
            side = np.where(low, 1, -1)
            if np.all(np.abs(f) < 1e-13):
                break
            den = fb - fa
            with np.errstate(divide="ignore", invalid="ignore"):
                nxt = (la * fb - lb * fa) / den
            lam = np.where((den > 0) & np.isfinite(nxt), nxt, 0.5 * (la + lb))
        out[mid] = lam
        below = r < rad[0]
        # between the centre and the smallest resolved radius: join to the peak
        out[below] = lev[0] + (top - lev[0]) * (1.0 - r[below] / rad[0])
    out = np.clip(out, 0.0, top)
    if COMPACT in u.flags:
        flags.append(COMPACT)
    return RadialProfile(u.grid, out, (), tuple(flags))


def _rearranged(u: RadialProfile, N: float) -> RadialProfile:
    return u if _is_nonincreasing(u) else decreasing_rearrangement(u, N)


def lp_norm(u: RadialProfile, N: float, p: float) -> NormResult:
    """(|S^{N-1}| int |U|^p r^{N-1} dr)^{1/p}."""
    if p <= 0:
        raise ParameterError(f"need p > 0, got {p}")
    res = power_integral(u.values, u.grid, p, N - 1.0, upper_tail=_upper_tail(u))
    return NormResult((sphere_area(N) * res.value) ** (1.0 / p), res.flags)


def lorentz_norm(u: RadialProfile, N: float, p_star: float, r: float) -> NormResult:
    """||u||_{L^{p*, r}} computed on the decreasing rearrangement.

    For finite r this is omega_N^{1/p*-1/r} (|S| int u*(rho)^r rho^{N r/p* - 1} drho)^{1/r};
    r = inf gives sup_rho omega_N^{1/p*} rho^{N/p*} u*(rho).
    """
    if p_star <= 1 or not (r >= 1):
        raise DomainError(f"requires p* > 1 and r >= 1 (got p*={p_star}, r={r})", "p* > 1, r >= 1")
    if _is_zero(u):
        return NormResult(0.0)
    us = _rearranged(u, N)
    w = omega(N)
    flags = tuple(f for f in us.flags if f in ("abs-taken", "truncated-support"))
    if math.isinf(r):
        vals = w ** (1.0 / p_star) * us.r ** (N / p_star) * us.values
        i = int(np.argmax(vals))
        if i == us.grid.n - 1 and _upper_tail(u):
            flags += ("sup-at-boundary",)
        return NormResult(float(vals[i]), flags, {"radius": float(us.r[i])})
    res = power_integral(us.values, us.grid, r, N * r / p_star - 1.0, upper_tail=_upper_tail(us))
    val = w ** (1.0 / p_star - 1.0 / r) * (sphere_area(N) * res.value) ** (1.0 / r)
    return NormResult(val, flags + res.flags)


def indicator_lorentz_norm(N: float, p_star: float, r: float, measure: float) -> float:
    """(p*/r)^{1/r} |E|^{1/p*}, the Lorentz norm of a characteristic function."""
    if math.isinf(r):
        return measure ** (1.0 / p_star)
    return (p_star / r) ** (1.0 / r) * measure ** (1.0 / p_star)


# ---------------------------------------------------------------------------
# Morrey
# ---------------------------------------------------------------------------

def sphere_fraction_in_ball(rho, a, R, N) -> np.ndarray:
    """Fraction of the sphere |x| = rho lying inside B(y, R) with |y| = a.

    Points with cos(angle to y) > c, c = (rho^2 + a^2 - R^2)/(2 rho a), form a
    cap whose normalized area is I_{1-c^2}((N-1)/2, 1/2)/2 for c >= 0.
    """
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (rho * rho + a * a - R * R) / (2.0 * rho * a)
    c = np.clip(np.nan_to_num(c, nan=-1.0 if R > a else 1.0), -1.0, 1.0)
    cap = 0.5 * special.betainc(0.5 * (N - 1), 0.5, 1.0 - c * c)
    return np.where(c >= 0.0, cap, 1.0 - cap)


class _BallMass:
    """int_{B(y,R)} |u|^p dx for radial u as a function of (|y|, R)."""

    def __init__(self, u: RadialProfile, N: float, p: float):
        self.N = N
        self.S = sphere_area(N)
        self.r_min = u.grid.r_min
        self.r_max = u.grid.r_max
        s = u.grid.s
        g = np.abs(u.values) ** p * np.exp(N * s)
        self.head = float(g[0]) / N  # int_0^{r_min} with U frozen at U(r_min)
        self.g0 = float(np.abs(u.values[0]) ** p)
        self.spline = CubicSpline(s, g)
        self.cumulative = self.spline.antiderivative()
        self.c0 = float(self.cumulative(s[0]))
        self.total = self.head + float(self.cumulative(s[-1])) - self.c0

    def inner(self, rho: float) -> float:
        """int_0^rho |U|^p t^{N-1} dt."""
        if rho <= 0.0:
            return 0.0
        if rho <= self.r_min:
            return self.g0 * rho ** self.N / self.N
        if rho >= self.r_max:
            return self.total
        return self.head + float(self.cumulative(math.log(rho))) - self.c0

    def density(self, rho: np.ndarray) -> np.ndarray:
        """|U(rho)|^p rho^{N-1}, zero beyond r_max."""
        out = np.zeros_like(rho)
        lo = rho < self.r_min
        out[lo] = self.g0 * rho[lo] ** (self.N - 1.0)
        mid = ~lo & (rho <= self.r_max)
        x = rho[mid]
        out[mid] = self.spline(np.log(x)) / x
        return out

    def __call__(self, a: float, R: float) -> float:
        if a <= 0.0:
            return self.S * self.inner(R)
        full = self.inner(R - a) if R > a else 0.0
        lo, hi = abs(R - a), min(R + a, self.r_max)
        if hi <= lo:
            return self.S * full
        # rho = lo + (hi - lo)(1 - cos(pi t))/2 removes the square-root edges
        t_edges = set(np.linspace(0.0, 1.0, 17).tolist())
        k0 = math.ceil(2.0 * math.log(max(lo, self.r_min)))
        k1 = math.floor(2.0 * math.log(hi))
        for k in range(k0, k1 + 1):
            x = math.exp(0.5 * k)
            if lo < x < hi:
                t_edges.add(math.acos(1.0 - 2.0 * (x - lo) / (hi - lo)) / math.pi)
        te = np.array(sorted(t_edges))
        mid = 0.5 * (te[1:] + te[:-1])
        half = 0.5 * (te[1:] - te[:-1])
        t = (mid[:, None] + half[:, None] * _GL8_X[None, :]).ravel()
        wt = (half[:, None] * _GL8_W[None, :]).ravel()
        rho = lo + 0.5 * (hi - lo) * (1.0 - np.cos(np.pi * t))
        jac = 0.5 * math.pi * (hi - lo) * np.sin(np.pi * t)
        frac = sphere_fraction_in_ball(rho, a, R, self.N)
        zone = float(np.sum(wt * jac * self.density(rho) * frac))
        return self.S * (full + zone)


def morrey_norm(u: RadialProfile, N: float, p: float, alpha: float,
                n_grid: int = MORREY_GRID) -> NormResult:
    """sup over balls of (R^{alpha-N} int_{B(y,R)} |u|^p)^{1/p}.

    Centres |y| (0 and ``n_grid - 1`` log-spaced values) and radii R
    (``n_grid`` log-spaced values) span the grid range; the best candidate
    is refined by Nelder-Mead in (ln|y|, ln R), and the centred candidate by
    a bounded search in ln R.  The maximizer is returned as
    {"center": |y|, "radius": R}.
    """
    if not (0.0 <= alpha <= N):
        raise DomainError(f"requires 0 <= alpha <= N (got alpha={alpha}, N={N})", "0 <= alpha <= N")
    if p < 1:
        raise DomainError(f"requires p >= 1 (got p={p})", "p >= 1")
    if _is_zero(u):
        return NormResult(0.0, (), {"center": 0.0, "radius": 0.0})
    mass = _BallMass(u, N, p)
    lo, hi = math.log(u.grid.r_min), math.log(u.grid.r_max)

    def logobj(la, lr):
        a = 0.0 if la is None else math.exp(min(max(la, lo), hi))
        R = math.exp(min(max(lr, lo), hi))
        m = mass(a, R)
        return (alpha - N) * math.log(R) + math.log(m) if m > 0 else -np.inf

    radii = np.linspace(lo, hi, n_grid)
    centres = [None] + np.linspace(lo, hi, n_grid - 1).tolist()
    table = np.array([[logobj(c, lr) for lr in radii] for c in centres])
    # centred balls
    j0 = int(np.argmax(table[0]))
    best = (table[0, j0], None, radii[j0])
    if 0 < j0 < n_grid - 1:
        res = optimize.minimize_scalar(lambda x: -logobj(None, x),
                                       bounds=(radii[j0 - 1], radii[j0 + 1]), method="bounded",
                                       options={"xatol": 1e-10})
        if -res.fun > best[0]:
            best = (-res.fun, None, float(res.x))
    # off-centre balls
    i, j = np.unravel_index(int(np.argmax(table[1:])), table[1:].shape)
    start = np.array([centres[i + 1], radii[j]])
    res = optimize.minimize(lambda x: -logobj(x[0], x[1]), start, method="Nelder-Mead",
                            options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 2000})
    cand = max(-res.fun, table[1:][i, j])
    if cand > best[0]:
        x = res.x if -res.fun >= table[1:][i, j] else start
        best = (cand, float(x[0]), float(x[1]))
    val, la, lr = best
    flags = []
    R = math.exp(min(max(lr, lo), hi))
    if R >= u.grid.r_max * (1 - 1e-12) or R <= u.grid.r_min * (1 + 1e-12):
        flags.append("sup-at-range-end")
    centre = 0.0 if la is None else math.exp(min(max(la, lo), hi))
    return NormResult(math.exp(val / p), tuple(flags), {"center": centre, "radius": R})


# ---------------------------------------------------------------------------
# Besov (heat-kernel) norm
# ---------------------------------------------------------------------------

def spherical_heat_kernel(xi, rho, t: float, N: float, method: str = "closed") -> np.ndarray:
    """Heat kernel averaged over the sphere |y| = rho, seen from |x| = xi,
    times |S^{N-1}|:

        k_t(xi, rho) = (4 pi t)^{-N/2} |S^{N-2}| int_{-1}^{1}
                       exp(-(xi^2 + rho^2 - 2 xi rho tau)/4t) (1 - tau^2)^{(N-3)/2} dtau,

    so that (K_t * u)(xi) = int U(rho) rho^{N-1} k_t(xi, rho) drho.

    ``method="closed"`` uses the modified Bessel form
    2 pi^{N/2} (2/z)^nu I_nu(z) exp(-(xi^2+rho^2)/4t), z = xi rho / 2t;
    ``method="gauss-jacobi"`` applies a 64-node Gauss-Jacobi rule to the
    angular integral.
    """
    xi = np.asarray(xi, dtype=float)
    rho = np.asarray(rho, dtype=float)
    pref = (4.0 * math.pi * t) ** (-0.5 * N)
    gauss = np.exp(-(xi - rho) ** 2 / (4.0 * t))
    z = xi * rho / (2.0 * t)
    if method == "closed":
        nu = 0.5 * (N - 2)
        small = z < 1e-6
        zz = np.where(small, 1.0, z)
        big = zz > 1e8
        zb = np.where(big, zz, 1e8)
        mu4 = 4.0 * nu * nu
        # large-argument expansion of exp(-z) I_nu(z)
        asym = (1.0 - (mu4 - 1.0) / (8.0 * zb)
                + (mu4 - 1.0) * (mu4 - 9.0) / (128.0 * zb * zb)) / np.sqrt(2.0 * math.pi * zb)
        with np.errstate(over="ignore", invalid="ignore"):
            phi = (2.0 / zz) ** nu * np.where(big, asym, special.ive(nu, np.where(big, 1.0, zz)))
        series = (1.0 + z * z / (4.0 * (nu + 1.0))) / special.gamma(nu + 1.0)
        phi = np.where(small, series * np.exp(-z), phi)
        return pref * 2.0 * math.pi ** (0.5 * N) * phi * gauss
    if method == "gauss-jacobi":
        if N < 2:
            raise DomainError("angular average needs N >= 2", "N >= 2")
        tau, wt = special.roots_jacobi(64, 0.5 * (N - 3), 0.5 * (N - 3))
        area = sphere_area(N - 1) if N > 2 else 2.0
        ang = np.exp(-z[..., None] * (1.0 - tau)) @ wt
        return pref * area * ang * gauss
    raise ParameterError(f"unknown kernel method {method!r}")


def _merge(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return out


def heat_convolution(u: RadialProfile, N: float, t: float, xi, method: str = "closed") -> np.ndarray:
    """(K_t * u)(x) at the radii ``xi``.

    The rho-integral uses 8-point Gauss-Legendre panels no wider than eight
    grid cells or sqrt(2t)/2, restricted to the union of windows
    |rho - xi| <= 9 sqrt(2t) where the kernel is above ~1e-18 of its peak.
    Below r_min U is frozen at U(r_min); beyond r_max it is zero.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    sig = math.sqrt(2.0 * t)
    L = 9.0 * sig
    r = u.r
    windows = _merge([(max(0.0, x - L), min(x + L, r[-1])) for x in xi if x - L < r[-1]])
    base = np.concatenate([[0.0], r[::8], [r[-1]]])
    base = np.unique(base)
    edges = []
    for a, b in windows:
        inner = base[(base > a) & (base < b)]
        pts = np.concatenate([[a], inner, [b]])
        widths = np.diff(pts)
        counts = np.maximum(1, np.ceil(widths / (0.5 * sig)).astype(int))
        for p0, p1, c in zip(pts[:-1], pts[1:], counts):
            edges.append(np.linspace(p0, p1, c + 1))
    if not edges:
        return np.zeros_like(xi)
    a = np.concatenate([e[:-1] for e in edges])
    b = np.concatenate([e[1:] for e in edges])
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    rho = (mid[:, None] + half[:, None] * _GL8_X[None, :]).ravel()
    w = (half[:, None] * _GL8_W[None, :]).ravel()
    vals = evaluate(u, rho)
    vals = np.where(rho < u.grid.r_min, u.values[0], vals)
    dens = w * vals * rho ** (N - 1.0)
    out = np.empty_like(xi)
    for i, x in enumerate(xi):
        near = np.abs(rho - x) <= L
        out[i] = np.sum(dens[near] * spherical_heat_kernel(x, rho[near], t, N, method))
    return out


def _besov_sup(u, N, s, t_grid, xs):
    logt = np.log(t_grid)
    table = np.empty((t_grid.size, xs.size))
    for i, t in enumerate(t_grid):
        table[i] = np.abs(heat_convolution(u, N, t, xs))
    score = 0.5 * s * logt[:, None] + np.log(np.maximum(table, 1e-300))
    i, j = np.unravel_index(int(np.argmax(score)), score.shape)
    return score, i, j


def besov_norm(u: RadialProfile, N: float, s: float, t_range=BESOV_T_RANGE,
               n_t: int = BESOV_T_POINTS, n_x: int = BESOV_X_POINTS) -> NormResult:
    """sup_t t^{s/2} ||K_t * u||_inf.

    ``n_t`` log-spaced times over ``t_range`` and the radii 0 plus ``n_x``
    log-spaced points are scanned; the maximizer is refined by golden-section
    search in ln t (and a bounded search in the radius when it is off the
    origin).  A maximum on the boundary of the t-range doubles the range in
    ln t once, with an :class:`AccuracyWarning`.
    """
    if s <= 0:
        raise DomainError(f"requires s > 0 (got s={s})", "s > 0")
    if _is_zero(u):
        return NormResult(0.0, (), {"t": 0.0, "x": 0.0})
    xs = np.concatenate([[0.0], np.geomspace(u.grid.r_min, u.grid.r_max, n_x)])
    flags = []
    t_lo, t_hi = t_range
    t_grid = np.geomspace(t_lo, t_hi, n_t)
    score, i, j = _besov_sup(u, N, s, t_grid, xs)
    if i in (0, n_t - 1):
        warnings.warn("Besov supremum on the boundary of the t-range; extending once",
                      AccuracyWarning, stacklevel=2)
        flags.append("range-extended")
        c = math.sqrt(t_lo * t_hi)
        span = (t_hi / t_lo)
        t_grid = np.geomspace(c / span, c * span, 2 * n_t)
        score, i, j = _besov_sup(u, N, s, t_grid, xs)
        if i in (0, t_grid.size - 1):
            flags.append("sup-at-boundary")
    logt = np.log(t_grid)
    x_best = float(xs[j])

    def f(lt, x):
        return -(0.5 * s * lt + math.log(max(abs(float(heat_convolution(u, N, math.exp(lt), [x])[0])),
                                             1e-300)))

    best = (-score[i, j], logt[i])
    if 0 < i < t_grid.size - 1:
        try:
            res = optimize.minimize_scalar(f, bracket=(logt[i - 1], logt[i], logt[i + 1]),
                                           args=(x_best,), method="golden",
                                           options={"xtol": 1e-8})
            if res.fun < best[0]:
                best = (float(res.fun), float(res.x))
        except ValueError:
            pass
    if j > 0:
        lo = xs[j - 1]
        hi = xs[j + 1] if j + 1 < xs.size else xs[j]
        res = optimize.minimize_scalar(lambda x: f(best[1], x), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-10 * max(hi, 1.0)})
        if res.fun < best[0]:
            best = (float(res.fun), best[1])
            x_best = float(res.x)
    return NormResult(math.exp(-best[0]), tuple(flags), {"t": math.exp(best[1]), "x": x_best})


def heat_kernel_besov_oracle(N: float, s: float, t0: float) -> tuple[float, float]:
    """Closed-form Besov norm of the heat kernel K_{t0}: the maximizer
    t* = s t0/(N - s) of t^{s/2} (4 pi (t + t0))^{-N/2} and its value."""
    if not 0 < s < N:
        raise DomainError("requires 0 < s < N", "0 < s < N")
    ts = s * t0 / (N - s)
    return ts ** (0.5 * s) * (4.0 * math.pi * (ts + t0)) ** (-0.5 * N), ts


# ---------------------------------------------------------------------------
# critical Sobolev norm and embeddings
# ---------------------------------------------------------------------------

def critical_exponent(N: float, m: int, parity: str = "even") -> float:
    """2N/(N-4m) (even order) or 2N/(N-4m-2) (odd order)."""
    d = N - 4 * m if parity == "even" else N - 4 * m - 2
    if d <= 0:
        need = "N > 4m" if parity == "even" else "N > 4m + 2"
        raise DomainError(f"requires {need} (got N={N}, m={m})", need)
    return 2.0 * N / d


def critical_sobolev_norm(u: RadialProfile, N: float, m: int, parity: str = "even") -> NormResult:
    """||u||_{L^q}, q = 2N/(N-4m) (even) or 2N/(N-4m-2) (odd); m = 0 gives L^2."""
    if parity not in ("even", "odd"):
        raise DomainError(f"unknown parity {parity!r}", "parity")
    q = critical_exponent(N, m, parity)
    return lp_norm(u, N, q)


EMBEDDINGS = ("morrey-besov", "morrey-morrey")


def embedding_ratio(u: RadialProfile, N: float, which: str, alpha: float,
                    p: float = 2.0) -> NormResult:
    """Target over source norm for the two Morrey embeddings.

    ``morrey-besov``:  ||u||_{B^{-alpha}} / ||u||_{M^{1,alpha}}
    ``morrey-morrey``: ||u||_{M^{1,alpha/p}} / ||u||_{M^{p,alpha}}
    The zero function has ratio 0.
    """
    if not (0.0 < alpha < N):
        raise DomainError(f"requires 0 < alpha < N (got alpha={alpha})", "0 < alpha < N")
    if which == "morrey-besov":
        num_f = lambda: besov_norm(u, N, alpha)  # noqa: E731
        den_f = lambda: morrey_norm(u, N, 1.0, alpha)  # noqa: E731
    elif which == "morrey-morrey":
        if p <= 1:
            raise DomainError(f"requires p > 1 (got p={p})", "p > 1")
        num_f = lambda: morrey_norm(u, N, 1.0, alpha / p)  # noqa: E731
        den_f = lambda: morrey_norm(u, N, p, alpha)  # noqa: E731
    else:
        raise ParameterError(f"unknown embedding {which!r}; expected one of {EMBEDDINGS}")
    if _is_zero(u):
        return NormResult(0.0, ("degenerate-input",))
    num, den = num_f(), den_f()
    return NormResult(num.value / den.value, num.flags + den.flags,
                      {"target": num.value, "source": den.value})


def indicator_profile(grid_n: int = 1024, radius: float = 1.0) -> RadialProfile:
    """The characteristic function of the ball of the given radius, as a
    compactly supported profile on a log-uniform grid ending at ``radius``."""
    from .radial_core import LOG_UNIFORM, make_grid
    g = make_grid(LOG_UNIFORM, radius * 1e-6, radius, grid_n)
    return RadialProfile(g, np.ones(g.n), (), (COMPACT,))
