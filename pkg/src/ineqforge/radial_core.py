"""Radial functions on graded grids: sampling, differentiation, integration.

A radial function u(x) = U(|x|) is stored as samples of U on a grid of radii
r_i in [r_min, r_max].  The log variable s = ln r is the natural coordinate:
power weights r^beta become exponentials, and d/ds = r d/dr.  Two grid kinds
are supported:

``log-uniform``
    nodes equally spaced in s.  Weights are the trapezoid rule in s with
    Gregory end corrections, so the rule is high order even when the integrand
    does not vanish at the ends.
``mapped-Chebyshev``
    Chebyshev-Lobatto points mapped affinely onto [r_min, r_max] with
    Clenshaw-Curtis weights.  Derivatives are taken on the Chebyshev
    coefficients, which suits smooth functions on a bounded range of radii.

Integrals over (0, inf) add power-law tail corrections outside the grid and
report an error estimate for them; see :func:`integrate`.

A :class:`RadialProfile` may carry exact derivative samples (filled in by the
analytic families).  Operations that only need algebra (products with powers
of r, the radial Laplacian) propagate these by the Leibniz rule.  When no
cached derivative is available the derivative is computed numerically in s.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.fft import dct
from scipy.interpolate import PchipInterpolator
from scipy.special import gammaln

from .errors import (
    AccuracyWarning,
    NumericError,
    ParameterError,
    UnsupportedOrderError,
)

LOG_UNIFORM = "log-uniform"
CHEBYSHEV = "mapped-Chebyshev"
GRID_KINDS = (LOG_UNIFORM, CHEBYSHEV)

MAX_ORDER = 8
GREGORY_ORDER = 8
FD_ORDER = 8
DEFAULT_N = 2048
DEFAULT_R_MIN = 1e-4
DEFAULT_R_MAX = 1e4
TAIL_RTOL = 1e-8
# profile flag: the function vanishes beyond r_max (no tail is extrapolated)
COMPACT = "compact-support"

_EPS = np.finfo(float).eps


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def gregory_corrections(order: int = GREGORY_ORDER) -> tuple[float, ...]:
    """End corrections c_j (j < order) for the trapezoid rule.

    With unit spacing the corrected rule
    ``sum f_i - (f_0 + f_n)/2 + sum_j c_j (f_j + f_{n-j})`` integrates
    polynomials of degree < order exactly.  Solved once in rational
    arithmetic.
    """
    import sympy as sp

    # Euler-Maclaurin: the left-end defect of the trapezoid rule for x^d is
    # B_{d+1}/(d+1) when d is odd and 0 when d is even.
    k = order
    rows = [[sp.Integer(j) ** d for j in range(k)] for d in range(k)]
    rhs = [sp.bernoulli(d + 1) / (d + 1) if d % 2 else sp.Integer(0) for d in range(k)]
    sol = sp.Matrix(rows).LUsolve(sp.Matrix(rhs))
    return tuple(float(c) for c in sol)


def _clenshaw_curtis(n: int) -> np.ndarray:
    """Clenshaw-Curtis weights on [-1, 1] for n Lobatto points."""
    N = n - 1
    theta = np.pi * np.arange(N + 1) / N
    w = np.zeros(N + 1)
    ii = np.arange(1, N)
    v = np.ones(N - 1)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N ** 2 - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
        v -= np.cos(N * theta[ii]) / (N ** 2 - 1)
    else:
        w[0] = w[N] = 1.0 / N ** 2
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
    w[ii] = 2.0 * v / N
    return w


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Immutable grid of radii with quadrature weights for ``dr``.

    ``weights @ g(nodes)`` approximates the integral of g over
    ``[r_min, r_max]``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    r_min: float
    r_max: float
    s: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def h(self) -> float:
        """Spacing in s (log-uniform grids only)."""
        if self.kind != LOG_UNIFORM:
            raise ParameterError("uniform spacing is defined only for log-uniform grids")
        return float(self.s[1] - self.s[0])

    def refined(self, factor: int = 2) -> "RadialGrid":
        """Same kind and range with ``factor`` times as many nodes."""
        return make_grid(self.kind, self.r_min, self.r_max, factor * self.n)

    def describe(self) -> dict:
        return {"kind": self.kind, "r_min": self.r_min, "r_max": self.r_max, "n": self.n}


def make_grid(kind: str = LOG_UNIFORM, r_min: float = DEFAULT_R_MIN,
              r_max: float = DEFAULT_R_MAX, n: int = DEFAULT_N) -> RadialGrid:
    """Build a radial grid.

    Parameters
    ----------
    kind : {"log-uniform", "mapped-Chebyshev"}
    r_min, r_max : float
        Positive bounds with ``r_min < r_max``.
    n : int
        Number of nodes, at least 16.
    """
    if kind not in GRID_KINDS:
        raise ParameterError(f"unknown grid kind {kind!r}; expected one of {GRID_KINDS}")
    n = int(n)
    if n < 16:
        raise ParameterError(f"grid needs at least 16 nodes, got {n}")
    r_min, r_max = float(r_min), float(r_max)
    if not (np.isfinite(r_min) and np.isfinite(r_max)) or not 0 < r_min < r_max:
        raise ParameterError(f"need 0 < r_min < r_max, got ({r_min}, {r_max})")
    a, b = math.log(r_min), math.log(r_max)
    if kind == LOG_UNIFORM:
        s = np.linspace(a, b, n)
        h = (b - a) / (n - 1)
        ws = np.full(n, h)
        ws[0] = ws[-1] = 0.5 * h
        corr = gregory_corrections(min(GREGORY_ORDER, n // 2))
        for j, c in enumerate(corr):
            ws[j] += h * c
            ws[n - 1 - j] += h * c
    else:
        x = -np.cos(np.pi * np.arange(n) / (n - 1))
        r = r_min + 0.5 * (r_max - r_min) * (x + 1.0)
        r[0], r[-1] = r_min, r_max
        w = 0.5 * (r_max - r_min) * _clenshaw_curtis(n)
        return RadialGrid(_readonly(r), _readonly(w), kind, r_min, r_max, _readonly(np.log(r)))
    s[0], s[-1] = a, b
    r = np.exp(s)
    r[0], r[-1] = r_min, r_max
    return RadialGrid(_readonly(r), _readonly(ws * r), kind, r_min, r_max, _readonly(s))


def default_grid(n: int = DEFAULT_N) -> RadialGrid:
    return make_grid(LOG_UNIFORM, DEFAULT_R_MIN, DEFAULT_R_MAX, n)


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Samples of a radial profile U on a grid.

    ``derivatives[k-1]`` holds exact samples of U^{(k)} when known.  The
    cached orders are always contiguous starting at 1.
    """

    grid: RadialGrid
    values: np.ndarray
    derivatives: tuple = ()
    flags: tuple = ()

    def __post_init__(self):
        vals = _readonly(self.values)
        if vals.shape != self.grid.nodes.shape:
            raise ParameterError("profile values must match the grid size")
        if not np.all(np.isfinite(vals)):
            raise NumericError("profile has non-finite samples")
        object.__setattr__(self, "values", vals)
        ders = tuple(_readonly(d) for d in self.derivatives)
        for d in ders:
            if d.shape != vals.shape:
                raise ParameterError("cached derivative has wrong shape")
        object.__setattr__(self, "derivatives", ders)
        object.__setattr__(self, "flags", tuple(self.flags))

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def cached_order(self) -> int:
        return len(self.derivatives)

    def order(self, k: int) -> np.ndarray:
        """Samples of U^{(k)}, computing numerically when not cached."""
        if k == 0:
            return self.values
        return derivative(self, k).values

    def stack(self, k: int) -> list:
        """[U, U', ..., U^{(k)}] as arrays (cache first, numeric beyond)."""
        out = [self.values] + list(self.derivatives[:k])
        if len(out) <= k:
            start = len(out) - 1
            for j in range(start + 1, k + 1):
                out.append(_numeric_r_derivative(self.grid, out[start], j - start))
        return out

    def with_values(self, values, derivatives=(), flags=None) -> "RadialProfile":
        return RadialProfile(self.grid, values, tuple(derivatives),
                             self.flags if flags is None else flags)

    def without_cache(self) -> "RadialProfile":
        return RadialProfile(self.grid, self.values, (), self.flags)

    def truncated_cache(self, k: int) -> "RadialProfile":
        return RadialProfile(self.grid, self.values, self.derivatives[:k], self.flags)

    def __mul__(self, c):
        if isinstance(c, RadialProfile):
            return product(self, c)
        c = float(c)
        return RadialProfile(self.grid, c * self.values,
                             tuple(c * d for d in self.derivatives), self.flags)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __add__(self, other: "RadialProfile") -> "RadialProfile":
        _same_grid(self, other)
        k = min(self.cached_order, other.cached_order)
        ders = tuple(a + b for a, b in zip(self.derivatives[:k], other.derivatives[:k]))
        return RadialProfile(self.grid, self.values + other.values, ders,
                             self.flags + other.flags)

    def __sub__(self, other: "RadialProfile") -> "RadialProfile":
        return self + (-other)

    def __call__(self, r) -> np.ndarray:
        return evaluate(self, r)

    def abs(self) -> "RadialProfile":
        return RadialProfile(self.grid, np.abs(self.values), (), self.flags)


def _same_grid(a: RadialProfile, b: RadialProfile):
    if a.grid is not b.grid and not (a.grid.kind == b.grid.kind
                                     and np.array_equal(a.grid.nodes, b.grid.nodes)):
        raise ParameterError("profiles live on different grids")


def profile_from_function(grid: RadialGrid, func: Callable,
                          derivatives: Sequence[Callable] = ()) -> RadialProfile:
    """Sample ``func`` (and optional exact derivatives) on ``grid``."""
    r = grid.nodes
    vals = np.broadcast_to(np.asarray(func(r), dtype=float), r.shape)
    ders = tuple(np.broadcast_to(np.asarray(d(r), dtype=float), r.shape)
                 for d in derivatives)
    return RadialProfile(grid, vals, ders)


def falling_factorial(a: float, l: int) -> float:
    out = 1.0
    for i in range(l):
        out *= a - i
    return out


def times_power(profile: RadialProfile, a: float) -> RadialProfile:
    """The profile r^a U(r), with cached derivatives carried by Leibniz."""
    r = profile.r
    vals = profile.values * r ** a
    ders = []
    stack = [profile.values] + list(profile.derivatives)
    for k in range(1, len(stack)):
        acc = np.zeros_like(vals)
        for l in range(k + 1):
            coef = math.comb(k, l) * falling_factorial(a, l)
            if coef != 0.0:
                acc += coef * r ** (a - l) * stack[k - l]
        ders.append(acc)
    return profile.with_values(vals, ders)


def product(p: RadialProfile, q: RadialProfile) -> RadialProfile:
    """Pointwise product with Leibniz-propagated cache."""
    _same_grid(p, q)
    sp = [p.values] + list(p.derivatives)
    sq = [q.values] + list(q.derivatives)
    K = min(len(sp), len(sq)) - 1
    ders = []
    for k in range(1, K + 1):
        acc = np.zeros_like(p.values)
        for l in range(k + 1):
            acc += math.comb(k, l) * sp[l] * sq[k - l]
        ders.append(acc)
    return RadialProfile(p.grid, p.values * q.values, tuple(ders), p.flags + q.flags)


def evaluate(profile: RadialProfile, r, degree: int = 9) -> np.ndarray:
    """Interpolate U at arbitrary radii (zero outside the grid).

    Local Lagrange interpolation in s on log-uniform grids, barycentric
    Chebyshev interpolation otherwise.
    """
    grid = profile.grid
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape)
    inside = (r >= grid.r_min * (1 - 1e-14)) & (r <= grid.r_max * (1 + 1e-14))
    if not np.any(inside):
        return out
    x = np.log(np.clip(r[inside], grid.r_min, grid.r_max))
    f = profile.values
    if grid.kind == LOG_UNIFORM:
        n = grid.n
        d = min(degree, n - 1)
        h = grid.h
        t = (x - grid.s[0]) / h
        i0 = np.clip(np.floor(t).astype(int) - d // 2, 0, n - 1 - d)
        t = t - i0
        idx = i0[:, None] + np.arange(d + 1)[None, :]
        nodes = np.arange(d + 1, dtype=float)
        diff = t[:, None] - nodes[None, :]
        exact = np.abs(diff) < 1e-13
        diff[exact] = 1.0
        bw = np.array([(-1.0) ** j * math.comb(d, j) for j in range(d + 1)])
        terms = bw[None, :] / diff
        val = (terms * f[idx]).sum(axis=1) / terms.sum(axis=1)
        hit = exact.any(axis=1)
        if np.any(hit):
            j = exact[hit].argmax(axis=1)
            val[hit] = f[idx[hit, j]]
        out[inside] = val
    else:
        x = np.clip(r[inside], grid.r_min, grid.r_max)
        n = grid.n
        bw = (-1.0) ** np.arange(n)
        bw[0] *= 0.5
        bw[-1] *= 0.5
        diff = x[:, None] - grid.nodes[None, :]
        exact = diff == 0.0
        diff[exact] = 1.0
        terms = bw[None, :] / diff
        val = (terms @ f) / terms.sum(axis=1)
        hit = exact.any(axis=1)
        if np.any(hit):
            val[hit] = f[exact[hit].argmax(axis=1)]
        out[inside] = val
    return out


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def fornberg_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights at ``z`` for derivatives 0..m on nodes ``x``.

    Returns an array of shape (len(x), m + 1).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


@lru_cache(maxsize=None)
def _fd_stencils(j: int, order: int, n: int):
    """Interior and boundary stencils for D^j with the given accuracy order."""
    npts = order + 2 * ((j + 1) // 2) - 1
    npts = min(npts, n)
    M = (npts - 1) // 2
    offsets = np.arange(-M, M + 1, dtype=float)
    interior = fornberg_weights(0.0, offsets, j)[:, j]
    nb = npts + (1 if npts % 2 else 0)
    nb = min(nb + 1, n)
    left = []
    for i in range(M):
        pts = np.arange(nb, dtype=float) - i
        left.append(fornberg_weights(0.0, pts, j)[:, j])
    return M, interior, nb, left


def log_derivative_fd(f: np.ndarray, h: float, j: int, order: int = FD_ORDER) -> np.ndarray:
    """D^j f for samples on a uniform grid with spacing h."""
    n = f.size
    M, interior, nb, left = _fd_stencils(j, order, n)
    out = np.empty(n)
    out[M:n - M] = np.correlate(f, interior, mode="valid")
    sign = (-1.0) ** j
    for i, w in enumerate(left):
        out[i] = w @ f[:nb]
        out[n - 1 - i] = sign * (w @ f[::-1][:nb])
    return out / h ** j


def log_derivative_spectral(f: np.ndarray, h: float, j: int) -> np.ndarray:
    """D^j f by FFT, discarding modes below the round-off floor."""
    n = f.size
    fh = np.fft.rfft(f)
    mag = np.abs(fh)
    floor = 64 * _EPS * max(mag.max(), 1e-300)
    above = np.nonzero(mag > floor)[0]
    cut = above[-1] + 1 if above.size else 1
    fh[cut:] = 0.0
    w = 2 * np.pi * np.fft.rfftfreq(n, d=h)
    mult = (1j * w) ** j
    if n % 2 == 0 and j % 2 == 1:
        mult[-1] = 0.0
    return np.fft.irfft(fh * mult, n=n)


def log_derivatives(grid: RadialGrid, f: np.ndarray, k: int, method: str = "auto") -> list:
    """[D f, D^2 f, ..., D^k f] with D = d/ds on a log-uniform grid."""
    if grid.kind != LOG_UNIFORM:
        raise ParameterError("log-variable derivatives need a log-uniform grid")
    if method == "auto":
        # finite differences keep round-off local to each node, which matters
        # once r^{-k} multiplies it at small radii
        method = "fd"
    if method == "spectral":
        return [log_derivative_spectral(f, grid.h, j) for j in range(1, k + 1)]
    if method == "fd":
        return [log_derivative_fd(f, grid.h, j) for j in range(1, k + 1)]
    raise ParameterError(f"unknown differentiation method {method!r}")


def chebyshev_coefficients(f: np.ndarray, chop: float = 1e-15) -> np.ndarray:
    """Chebyshev coefficients of samples at ascending Lobatto points.

    Trailing coefficients below ``chop`` times the largest are dropped.
    """
    N = f.size - 1
    c = dct(f[::-1], type=1) / N
    c[0] *= 0.5
    c[-1] *= 0.5
    big = np.nonzero(np.abs(c) > chop * np.max(np.abs(c)))[0]
    return c[:big[-1] + 1] if big.size else c[:1]


def chebyshev_derivative(grid: RadialGrid, f: np.ndarray, k: int) -> np.ndarray:
    """d^k f/dr^k on a Chebyshev grid through the coefficient recurrence."""
    c = chebyshev_coefficients(f)
    scale = 2.0 / (grid.r_max - grid.r_min)
    for _ in range(k):
        m = c.size
        d = np.zeros(m + 1)
        for j in range(m - 1, 0, -1):
            d[j - 1] = d[j + 1] + 2 * j * c[j]
        d[0] *= 0.5
        c = d[:max(m - 1, 1)] * scale
    x = 2.0 * (grid.nodes - grid.r_min) / (grid.r_max - grid.r_min) - 1.0
    return np.polynomial.chebyshev.chebval(x, c)


@lru_cache(maxsize=None)
def stirling1(k: int) -> tuple[int, ...]:
    """Signed Stirling numbers s(k, j), j = 0..k: falling factorial coefficients."""
    row = [1]
    for n in range(k):
        new = [0] * (len(row) + 1)
        for j, c in enumerate(row):
            new[j + 1] += c
            new[j] -= n * c
        row = new
    return tuple(row)


def _numeric_r_derivative(grid: RadialGrid, f: np.ndarray, k: int,
                          method: str = "auto") -> np.ndarray:
    if grid.kind == CHEBYSHEV:
        return chebyshev_derivative(grid, f, k)
    # r^k d^k/dr^k = D(D-1)...(D-k+1) = sum_j s(k, j) D^j
    Ds = log_derivatives(grid, f, k, method)
    st = stirling1(k)
    acc = np.zeros_like(f)
    for j in range(1, k + 1):
        acc += st[j] * Ds[j - 1]
    return acc * grid.nodes ** (-float(k))


def derivative(profile: RadialProfile, k: int = 1, method: str = "auto") -> RadialProfile:
    """The k-th derivative U^{(k)}.

    Uses cached exact samples when available; otherwise differentiates the
    highest cached order numerically: order-8 finite differences in the log
    variable (or FFT with ``method="spectral"``) on log-uniform grids, the
    Chebyshev coefficient recurrence on Chebyshev grids.
    """
    k = int(k)
    if k < 0:
        raise ParameterError("derivative order must be nonnegative")
    if k > MAX_ORDER:
        raise UnsupportedOrderError(f"derivative order {k} exceeds maximum {MAX_ORDER}")
    if k == 0:
        return profile
    if profile.cached_order >= k:
        return profile.with_values(profile.derivatives[k - 1], profile.derivatives[k:])
    j = profile.cached_order
    base = profile.values if j == 0 else profile.derivatives[j - 1]
    vals = _numeric_r_derivative(profile.grid, base, k - j, method)
    return profile.with_values(vals, ())


def over_r(profile: RadialProfile) -> RadialProfile:
    """The profile U'(r)/r.

    With a cache this is r^{-1} U' by Leibniz; otherwise it is computed as
    e^{-2s} dU/ds, which avoids forming U' and dividing at tiny radii.
    """
    if profile.cached_order >= 1 or profile.grid.kind == CHEBYSHEV:
        return times_power(derivative(profile, 1), -1.0)
    grid = profile.grid
    Df = log_derivatives(grid, profile.values, 1)[0]
    return profile.with_values(Df * grid.nodes ** -2.0, ())


def radial_laplacian(profile: RadialProfile, N: float) -> RadialProfile:
    """U'' + (N-1) U'/r, keeping as many cached orders as possible."""
    if N < 1:
        raise ParameterError("dimension must be at least 1")
    if profile.cached_order >= 2:
        d2 = derivative(profile, 2)
        w = over_r(profile)
        k = min(d2.cached_order, w.cached_order)
        vals = d2.values + (N - 1) * w.values
        ders = [d2.derivatives[i] + (N - 1) * w.derivatives[i] for i in range(k)]
        return profile.with_values(vals, ders)
    grid = profile.grid
    r = grid.nodes
    if grid.kind == CHEBYSHEV:
        d1 = derivative(profile, 1).values
        d2 = derivative(profile, 2).values
        return profile.with_values(d2 + (N - 1) * d1 / r, ())
    if profile.cached_order == 1:
        d1 = profile.derivatives[0]
        vals = (log_derivatives(grid, d1, 1)[0] + (N - 1) * d1) / r
    else:
        # r^2 Delta U = (D^2 + (N-2) D) U in the log variable
        D1, D2 = log_derivatives(grid, profile.values, 2)
        vals = (D2 + (N - 2) * D1) * r ** -2.0
    out = profile.with_values(vals, ())
    _check_noise(profile, out, 2 - profile.cached_order)
    return out


def _check_noise(src: RadialProfile, out: RadialProfile, k: int):
    """Flag when round-off amplified by k numeric derivatives is visible."""
    grid = src.grid
    r = grid.nodes
    amp = (2.0 / grid.h) ** k
    noise = 64 * _EPS * np.max(np.abs(src.values)) * amp * r ** (-float(k))
    scale = np.max(np.abs(out.values))
    if scale > 0 and np.any(noise > 1e-8 * scale):
        msg = "numeric differentiation noise exceeds 1e-8 of the result near small radii"
        warnings.warn(msg, AccuracyWarning, stacklevel=3)
        object.__setattr__(out, "flags", out.flags + ("noise-amplified",))


def iterated_laplacian(profile: RadialProfile, N: float, m: int) -> RadialProfile:
    out = profile
    for _ in range(m):
        out = radial_laplacian(out, N)
    return out


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegralResult:
    """An integral over (0, inf) with tail bookkeeping.

    ``value`` includes the tail corrections; ``tail`` is their sum and
    ``tail_error`` an estimate of their uncertainty.
    """

    value: float
    tail: float
    tail_error: float
    flags: tuple = ()

    def __float__(self):
        return self.value


def _tail_model(g, r, s, idx, side):
    """Fit g = r^beta (c0 + c1 t) through three nodes, t = r (low) or 1/r (high).

    beta is the local log-slope extrapolated linearly in t to t = 0.
    Returns (beta, c0, c1) or None when the samples cannot be fitted.
    """
    i, j, k = idx
    gi, gj, gk = g[i], g[j], g[k]
    if gi == 0.0 or gj == 0.0 or gk == 0.0 or not (np.sign(gi) == np.sign(gj) == np.sign(gk)):
        return None
    a_ij = math.log(gj / gi) / (s[j] - s[i])
    a_jk = math.log(gk / gj) / (s[k] - s[j])
    t_ij = math.exp(0.5 * (s[i] + s[j]))
    t_jk = math.exp(0.5 * (s[j] + s[k]))
    if side == "high":
        t_ij, t_jk = 1.0 / t_ij, 1.0 / t_jk
    if t_jk == t_ij:
        return None
    beta = a_ij - (a_jk - a_ij) * t_ij / (t_jk - t_ij)
    ti = r[i] if side == "low" else 1.0 / r[i]
    tj = r[j] if side == "low" else 1.0 / r[j]
    yi = gi * math.exp(-beta * s[i])
    yj = gj * math.exp(-beta * s[j])
    c1 = (yj - yi) / (tj - ti)
    c0 = yi - c1 * ti
    return beta, c0, c1


def _model_tail(model, r_end, side):
    beta, c0, c1 = model
    if side == "low":
        if beta + 1.0 <= 0.0:
            return None
        return c0 * r_end ** (beta + 1) / (beta + 1) + c1 * r_end ** (beta + 2) / (beta + 2)
    if beta + 1.0 >= 0.0:
        return None
    return -c0 * r_end ** (beta + 1) / (beta + 1) - c1 * r_end ** beta / beta


def _tail(g: np.ndarray, s: np.ndarray, r: np.ndarray, side: str, body: float):
    """Tail beyond one end.  Returns (correction, error, flag).

    The model is fitted on the three end nodes; the error estimate comes from
    the same model fitted one node further in.
    """
    n = g.size
    if side == "low":
        e, first, second = 0, (0, 1, 2), (1, 2, 3)
    else:
        e, first, second = n - 1, (n - 1, n - 2, n - 3), (n - 2, n - 3, n - 4)
    raw = abs(g[e] * r[e])
    if raw == 0.0 or raw <= 1e-17 * abs(body):
        return 0.0, raw, None
    m1 = _tail_model(g, r, s, first, side)
    if m1 is None:
        return 0.0, raw, "unfitted-" + side
    c_1 = _model_tail(m1, r[e], side)
    if c_1 is None or not math.isfinite(c_1):
        return 0.0, raw, "divergent-" + side
    m2 = _tail_model(g, r, s, second, side)
    c_2 = None if m2 is None else _model_tail(m2, r[e], side)
    if c_2 is None or not math.isfinite(c_2):
        return c_1, max(abs(c_1), raw), None
    # the neglected term scales like r^{beta+3} (or r^{beta-1} at infinity);
    # the shift between the two fits is its s-derivative times the spacing
    ds = abs(s[second[0]] - s[first[0]])
    order = abs(m1[0] + 3.0) if side == "low" else abs(m1[0] - 1.0)
    return c_1, abs(c_1 - c_2) / max(order * ds, 1e-3), None


def integrate(grid: RadialGrid, g: np.ndarray, rtol: float = TAIL_RTOL,
              upper_tail: bool = True) -> IntegralResult:
    """Integral of sampled g over (0, inf).

    The grid rule covers [r_min, r_max].  Beyond each end the integrand is
    modelled as r^beta (c0 + c1 t), with t = r near 0 and t = 1/r near
    infinity, and integrated in closed form.  Refitting one node further in
    gives the tail error.  Flags are raised when the tail error exceeds
    ``rtol`` of the total or the fitted power is not integrable.
    ``upper_tail=False`` treats the integrand as zero beyond r_max.
    """
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise NumericError("integrand has non-finite samples")
    body = float(grid.weights @ g)
    s, r = grid.s, grid.nodes
    cl, el, fl = _tail(g, s, r, "low", body)
    ch, eh, fh = _tail(g, s, r, "high", body) if upper_tail else (0.0, 0.0, None)
    value = body + cl + ch
    err = el + eh
    flags = []
    for f, e in ((fl, el), (fh, eh)):
        if f is not None and e > rtol * abs(value):
            flags.append(f)
    if not flags and err > rtol * abs(value) and value != 0.0:
        flags.append("tail-error")
    return IntegralResult(value, cl + ch, err, tuple(flags))


def weighted_integral(profile: RadialProfile, beta: float = 0.0, *,
                      report: bool = False):
    """Integral of U(r) r^beta dr over (0, inf).

    With ``report=True`` an :class:`IntegralResult` is returned instead of a
    float.
    """
    res = integrate(profile.grid, profile.values * profile.r ** float(beta))
    return res if report else res.value


def squared_integral(values: np.ndarray, grid: RadialGrid, beta: float,
                     upper_tail: bool = True) -> IntegralResult:
    """Integral of |values|^2 r^beta dr, formed as (|v| r^{beta/2})^2 to avoid overflow."""
    y = np.abs(values) * grid.nodes ** (0.5 * beta)
    return integrate(grid, y * y, upper_tail=upper_tail)


def power_integral(values: np.ndarray, grid: RadialGrid, p: float, beta: float,
                   upper_tail: bool = True) -> IntegralResult:
    """Integral of |values|^p r^beta dr."""
    y = np.abs(values) * grid.nodes ** (beta / p)
    return integrate(grid, y ** p, upper_tail=upper_tail)


def sphere_area(N: float) -> float:
    """Surface area of the unit sphere in R^N: 2 pi^{N/2} / Gamma(N/2)."""
    if N < 1:
        raise ParameterError("dimension must be at least 1")
    return float(2.0 * math.exp(0.5 * N * math.log(math.pi) - gammaln(0.5 * N)))


def ball_volume(N: float) -> float:
    """Volume of the unit ball in R^N: pi^{N/2} / Gamma(N/2 + 1)."""
    if N < 1:
        raise ParameterError("dimension must be at least 1")
    return float(math.exp(0.5 * N * math.log(math.pi) - gammaln(0.5 * N + 1)))


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def _is_log_uniform(r: np.ndarray) -> bool:
    if r.size < 16 or np.any(r <= 0):
        return False
    ds = np.diff(np.log(r))
    return bool(np.all(ds > 0) and np.ptp(ds) <= 1e-9 * np.mean(ds))


def read_profile(path, grid: RadialGrid | None = None) -> RadialProfile:
    """Load a two-column ``r value`` file.

    Log-uniformly spaced radii are used as the grid directly.  Anything else
    is resampled (monotone cubic in s) onto ``grid`` or onto a log-uniform
    grid spanning the file's range.
    """
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise ParameterError("profile file must have exactly two columns")
    r, v = data[:, 0], data[:, 1]
    if np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ParameterError("radii must be positive and strictly ascending")
    if not np.all(np.isfinite(v)):
        raise NumericError("profile file has non-finite values")
    if grid is None and _is_log_uniform(r):
        g = make_grid(LOG_UNIFORM, r[0], r[-1], r.size)
        return RadialProfile(g, v)
    if grid is None:
        grid = make_grid(LOG_UNIFORM, r[0], r[-1], max(DEFAULT_N // 4, r.size))
    interp = PchipInterpolator(np.log(r), v, extrapolate=False)
    vals = np.nan_to_num(interp(grid.s), nan=0.0)
    return RadialProfile(grid, vals, (), ("resampled",))


def write_profile(profile: RadialProfile, path):
    np.savetxt(path, np.column_stack([profile.r, profile.values]), fmt="%.17g")
