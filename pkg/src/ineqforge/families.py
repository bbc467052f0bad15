"""Analytic radial test families with exact derivative caches.

Each template is a sympy expression in ``r`` and named parameters.  Its
derivatives are differentiated symbolically once and compiled with
``lambdify``; profiles built from a template carry exact samples of
U, U', ..., U^{(order)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy as sp
from scipy import special

from .errors import ParameterError
from .radial_core import (
    DEFAULT_N,
    LOG_UNIFORM,
    MAX_ORDER,
    RadialGrid,
    RadialProfile,
    default_grid,
    make_grid,
)

R = sp.Symbol("r", positive=True)
_MODULES = [{"erfc": special.erfc, "erf": special.erf}, "numpy"]


class ClosedForm:
    """A sympy template U(r; params) with compiled derivatives."""

    def __init__(self, name: str, expr: sp.Expr, params: tuple):
        self.name = name
        self.expr = expr
        self.params = tuple(params)
        self._symbols = tuple(sp.Symbol(p, real=True) for p in self.params)
        self._exprs = [expr]

    def __repr__(self):
        return f"ClosedForm({self.name!r}, {self.expr})"

    def derivative_expr(self, k: int) -> sp.Expr:
        while len(self._exprs) <= k:
            self._exprs.append(sp.diff(self._exprs[-1], R))
        return self._exprs[k]

    @lru_cache(maxsize=None)
    def compiled(self, k: int) -> Callable:
        return sp.lambdify((R,) + self._symbols, self.derivative_expr(k), modules=_MODULES)

    def __hash__(self):
        return id(self)

    def evaluate(self, r, k: int = 0, **params) -> np.ndarray:
        args = [float(params[p]) for p in self.params]
        r = np.asarray(r, dtype=float)
        return np.broadcast_to(np.asarray(self.compiled(k)(r, *args), dtype=float), r.shape)

    def profile(self, grid: RadialGrid | None = None, order: int = 4,
                dilation: float = 1.0, amplitude: float = 1.0, **params) -> RadialProfile:
        """Samples of amplitude * U(dilation * r) with ``order`` exact derivatives."""
        grid = default_grid() if grid is None else grid
        if order > MAX_ORDER + 1:
            raise ParameterError(f"cache order above {MAX_ORDER + 1} is not supported")
        missing = set(self.params) - set(params)
        if missing:
            raise ParameterError(f"{self.name}: missing parameters {sorted(missing)}")
        x = dilation * grid.nodes
        vals = amplitude * self.evaluate(x, 0, **params)
        ders = tuple(amplitude * dilation ** k * self.evaluate(x, k, **params)
                     for k in range(1, order + 1))
        with np.errstate(all="ignore"):
            return RadialProfile(grid, np.nan_to_num(vals), tuple(np.nan_to_num(d) for d in ders))


GAUSSIAN_POLY = ClosedForm("gaussian-poly", (1 + sp.Symbol("a", real=True) * R ** 2
                                             + sp.Symbol("b", real=True) * R ** 4)
                           * sp.exp(-R ** 2), ("a", "b"))
RATIONAL = ClosedForm("rational", (1 + R ** 2) ** (-sp.Symbol("a", real=True)), ("a",))
CUTOFF_POWER = ClosedForm(
    "cutoff-power",
    R ** sp.Symbol("b", real=True)
    * sp.erfc(sp.log(R) / sp.Symbol("w", real=True)) / 2,
    ("b", "w"))
LOG_BUMP = ClosedForm(
    "log-bump",
    sp.exp(-(sp.log(R) - sp.Symbol("c", real=True)) ** 2
           / (2 * sp.Symbol("sigma", real=True) ** 2)),
    ("c", "sigma"))
GAUSSIAN = ClosedForm("gaussian", sp.exp(-R ** 2), ())
EXPONENTIAL = ClosedForm("exponential", sp.exp(-R), ())


def gaussian(grid=None, order=4, width=1.0, amplitude=1.0) -> RadialProfile:
    """amplitude * exp(-(r/width)^2)."""
    return GAUSSIAN.profile(grid, order, dilation=1.0 / width, amplitude=amplitude)


def heat_kernel(N, t, grid=None, order=2) -> RadialProfile:
    """K_t(r) = exp(-r^2/4t) / (4 pi t)^{N/2}."""
    return GAUSSIAN.profile(grid, order, dilation=1.0 / (2.0 * math.sqrt(t)),
                            amplitude=(4 * math.pi * t) ** (-N / 2.0))


def log_bumps(grid, centers, widths, amplitudes, order=4) -> RadialProfile:
    """Superposition of exp(-(ln r - c)^2 / (2 sigma^2)) bumps."""
    out = None
    for c, sgm, a in zip(centers, widths, amplitudes):
        p = LOG_BUMP.profile(grid, order, amplitude=a, c=c, sigma=sgm)
        out = p if out is None else out + p
    if out is None:
        raise ParameterError("need at least one bump")
    return out


def random_bump_params(rng: np.random.Generator, count: int | None = None) -> dict:
    """Random smooth bump superposition parameters (1-3 bumps)."""
    k = int(rng.integers(1, 4)) if count is None else count
    return {
        "centers": rng.uniform(-1.0, 1.0, k).tolist(),
        "widths": rng.uniform(0.35, 0.6, k).tolist(),
        "amplitudes": rng.uniform(0.3, 1.5, k).tolist(),
    }


def bump_corpus(size: int = 50, seed: int = 0, grid=None, order=4) -> list:
    """Deterministic randomized corpus of smooth bump superpositions."""
    rng = np.random.default_rng(seed)
    grid = default_grid() if grid is None else grid
    return [log_bumps(grid, order=order, **random_bump_params(rng)) for _ in range(size)]


# ---------------------------------------------------------------------------
# parametric families for the harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFamily:
    """A named parametric family of radial profiles.

    ``members`` lists parameter dictionaries; ``bounds`` gives the box used
    by the optimizer for the entries of ``param_names``.
    """

    __test__ = False  # not a pytest class

    name: str
    param_names: tuple
    bounds: tuple
    members: tuple
    builder: Callable = field(repr=False)

    def build(self, params: dict, n: int = DEFAULT_N, order: int = 4) -> RadialProfile:
        return self.builder(dict(params), n, order)

    def vector_to_params(self, x) -> dict:
        return {k: float(v) for k, v in zip(self.param_names, x)}

    def with_members(self, members) -> "TestFamily":
        return TestFamily(self.name, self.param_names, self.bounds, tuple(members), self.builder)


def _grid(n, r_min=1e-4, r_max=1e4):
    return make_grid(LOG_UNIFORM, r_min, r_max, n)


def gaussian_family(N, m, count=20, seed=0) -> TestFamily:
    rng = np.random.default_rng(seed)
    members = [{"a": 0.0, "b": 0.0}]
    while len(members) < count:
        members.append({"a": float(rng.uniform(-0.5, 2.0)), "b": float(rng.uniform(0.0, 1.0))})

    def build(p, n, order):
        return GAUSSIAN_POLY.profile(_grid(n, 1e-4, 1e2), order, dilation=p.get("dilation", 1.0),
                                     a=p["a"], b=p["b"])

    return TestFamily("gaussians", ("a", "b"), ((-0.5, 2.0), (0.0, 1.0)), tuple(members), build)


def rational_family(N, m) -> TestFamily:
    floor = (N - 4 * m) / 4.0
    exps = [a for a in (1.0, 1.5, 2.0, 3.0) if a > floor + 0.1]

    def build(p, n, order):
        return RATIONAL.profile(_grid(n), order, dilation=p.get("dilation", 1.0), a=p["a"])

    return TestFamily("rational", ("a",), ((floor + 0.1, 4.0),),
                      tuple({"a": a} for a in exps), build)


def cutoff_family(N, m, parity="even") -> TestFamily:
    """r^{-(N-2k)/2 + eps} * erfc(ln r / w)/2, k = 2m (even) or 2m+1 (odd)."""
    k = 2 * m if parity == "even" else 2 * m + 1
    base = -(N - 2 * k) / 2.0
    members = [{"eps": e, "w": w} for e in (0.4, 0.2, 0.1, 0.05) for w in (1.0, 3.0)]

    def build(p, n, order):
        w = p["w"]
        grid = _grid(n, math.exp(-8.0 * w - 6.0), math.exp(8.0 * w + 2.0))
        return CUTOFF_POWER.profile(grid, order, dilation=p.get("dilation", 1.0),
                                    b=base + p["eps"], w=w)

    return TestFamily("cutoff", ("eps", "w"), ((0.01, 0.5), (0.5, 6.0)), tuple(members), build)


def bump_family(N, m, count=12, seed=1) -> TestFamily:
    """Two-bump superpositions parameterized by offset, widths and weight."""
    rng = np.random.default_rng(seed)
    members = []
    for _ in range(count):
        members.append({"offset": float(rng.uniform(0.0, 2.0)),
                        "sigma1": float(rng.uniform(0.35, 0.8)),
                        "sigma2": float(rng.uniform(0.35, 0.8)),
                        "weight": float(rng.uniform(-1.0, 1.0))})

    def build(p, n, order):
        grid = _grid(n, 1e-4, 1e4)
        lam = p.get("dilation", 1.0)
        c = -math.log(lam)
        prof = log_bumps(grid, [c, c + p["offset"]], [p["sigma1"], p["sigma2"]],
                         [1.0, p["weight"]], order)
        return prof

    return TestFamily("bumps", ("offset", "sigma1", "sigma2", "weight"),
                      ((0.0, 3.0), (0.3, 1.0), (0.3, 1.0), (-1.0, 1.0)), tuple(members), build)


def shell_family(sigmas=None) -> TestFamily:
    """Single log-bump of width sigma: concentrates on the unit sphere as sigma -> 0."""
    if sigmas is None:
        sigmas = 10.0 ** np.linspace(-0.5, -2.5, 9)

    def build(p, n, order):
        s = p["sigma"]
        grid = _grid(n, math.exp(-12.0 * s), math.exp(12.0 * s))
        return LOG_BUMP.profile(grid, order, dilation=p.get("dilation", 1.0), c=0.0, sigma=s)

    return TestFamily("shell", ("sigma",), ((1e-3, 1.0),),
                      tuple({"sigma": float(s)} for s in sigmas), build)


def builtin_families(N, m, parity="even") -> dict:
    return {
        "gaussians": gaussian_family(N, m),
        "rational": rational_family(N, m),
        "cutoff": cutoff_family(N, m, parity),
        "bumps": bump_family(N, m),
    }


def dilation_orbit(family: TestFamily, params: dict, lambdas=(0.5, 2.0, 10.0)) -> list:
    """Parameter dictionaries for u(lambda r) along a dilation orbit."""
    return [dict(params, dilation=float(lam)) for lam in lambdas]
