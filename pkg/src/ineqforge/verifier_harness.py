"""End-to-end verdicts for the interpolation inequalities.

Every runner evaluates the two sides of an inequality on a corpus of radial
profiles and records LHS, RHS and their ratio per profile.  Minima over a
corpus are family-relative: they bound the best constant from above over the
family, and say nothing about profiles outside it.
"""

from __future__ import annotations

import math
import zlib

import numpy as np
from scipy import optimize
from scipy.interpolate import CubicSpline
from scipy.special import hyp2f1

from . import sharp_constants as sc
from .errors import DomainError, ParameterError
from .families import (
    EXPONENTIAL,
    GAUSSIAN,
    RATIONAL,
    TestFamily,
    builtin_families,
    cutoff_family,
    dilation_orbit,
    shell_family,
)
from .norms import (
    critical_exponent,
    critical_sobolev_norm,
    decreasing_rearrangement,
    local_maxima,
    lorentz_norm,
)
from .quadratic_forms import (
    EPS_QUAD_REL,
    check_even,
    check_odd,
    deficit_even,
    deficit_odd,
    interpolation_value,
)
from .radial_core import (
    DEFAULT_N,
    LOG_UNIFORM,
    RadialProfile,
    derivative,
    evaluate,
    iterated_laplacian,
    make_grid,
    power_integral,
    sphere_area,
    squared_integral,
)
from .reports import VerificationReport, parallel_map

RATIO_FLOOR = 1e-3
DILATIONS = (0.5, 2.0, 10.0)
DILATION_RTOL = 1e-6
OPT_BUDGET = 2000
OPT_STARTS = 8
PENALTY = 1e300
CHAIN_RTOL = 1e-6
PRESERVE_RTOL = 1e-5
# f* has kinks where level sets merge; grid quadrature across them is O(h^2)
REDUCTION_N = 4096

OUT_OF_RANGE = "out-of-range probe"
FAMILY_RELATIVE = "family-relative"

# accuracy flags that invalidate a row; informational flags are kept apart
_BENIGN = ("abs-taken", "rearranged", "compact-support")


def _accuracy_flags(flags) -> list:
    return [f for f in flags if not any(f.endswith(b) for b in _BENIGN)]


def _theta_range(N, m, parity):
    hi = 2 * m if parity == "even" else 2 * m + 1
    return 1.0 / N, hi / N


def _check_parity(N, m, parity):
    if parity == "even":
        check_even(N, m)
    elif parity == "odd":
        check_odd(N, m)
    else:
        raise ParameterError(f"parity must be 'even' or 'odd', got {parity!r}")


def _build_order(m, parity):
    return 2 * m + 2 if parity == "even" else 2 * m + 3


def _resolve_families(family, N, m, parity) -> list:
    """A family name, 'all', a TestFamily, or a list of either."""
    if isinstance(family, TestFamily):
        return [family]
    if isinstance(family, (list, tuple)):
        out = []
        for f in family:
            out.extend(_resolve_families(f, N, m, parity))
        return out
    table = builtin_families(N, m, parity)
    table["shell"] = shell_family()
    if family in (None, "all"):
        return [table[k] for k in ("gaussians", "rational", "cutoff", "bumps")]
    if family not in table:
        raise ParameterError(f"unknown family {family!r}; expected one of {sorted(table)} or 'all'")
    return [table[family]]


# ---------------------------------------------------------------------------
# radial interpolation inequality
# ---------------------------------------------------------------------------

def radial_terms(u: RadialProfile, N, m, parity="even") -> dict:
    """The theta-independent pieces: A, weighted integral, deficit and the
    squared critical norm."""
    rep = (deficit_even if parity == "even" else deficit_odd)(u, N, m, strict=False)
    crit = critical_sobolev_norm(u, N, m, parity)
    return {"A": rep.A, "B": rep.B, "deficit": rep.deficit, "weighted": rep.weighted,
            "rhs": crit.value ** 2, "eps_quad": rep.eps_quad,
            "flags": list(rep.flags) + [f"rhs:{f}" for f in crit.flags]}


def ratio_from_terms(t: dict, theta: float) -> dict:
    lhs = interpolation_value(t["deficit"], t["weighted"], theta)
    ratio = lhs / t["rhs"] if t["rhs"] > 0 else None
    case = "case1" if (1.0 - theta) * t["A"] >= t["B"] else "case2"
    flags = list(t["flags"])
    if t["deficit"] < -t["eps_quad"]:
        flags.append("negative-deficit")
    return {"lhs": lhs, "rhs": t["rhs"], "ratio": ratio, "case": case,
            "A": t["A"], "B": t["B"], "deficit": t["deficit"], "weighted": t["weighted"],
            "flags": flags}


def radial_row(u: RadialProfile, N, m, theta, parity="even") -> dict:
    if not np.any(u.values):
        return {"lhs": 0.0, "rhs": 0.0, "ratio": None, "case": None, "flags": ["degenerate-input"]}
    return ratio_from_terms(radial_terms(u, N, m, parity), theta)


def _family_rows(fam: TestFamily, N, m, theta, parity, n, members=None):
    order = _build_order(m, parity)
    members = list(fam.members if members is None else members)

    def one(params):
        row = radial_row(fam.build(params, n, order), N, m, theta, parity)
        row["family"] = fam.name
        row["params"] = dict(params)
        return row

    return parallel_map(one, members)


def _min_ratio(rows):
    vals = [r["ratio"] for r in rows
            if r["ratio"] is not None and not _accuracy_flags(r["flags"])]
    return min(vals) if vals else None


def _floor_for(ratio_floor, name):
    if isinstance(ratio_floor, dict):
        return float(ratio_floor.get(name, RATIO_FLOOR))
    return float(ratio_floor)


def verify_radial_interpolation(N, m, theta, family="all", parity="even", n=DEFAULT_N,
                                ratio_floor=RATIO_FLOOR, refine=True, dilations=DILATIONS,
                                config=None) -> VerificationReport:
    """Check (A - B)^theta W^{1-theta} >= C ||u||^2_{L^{2N/(N-2k)}} on a corpus.

    A, B are the order-2k forms (k = 2m even, 2m+1 odd) and W is the
    weighted integral without its constant.  With ``refine`` the corpus is
    re-run on a grid with twice the nodes and the drift of the minimum ratio
    is reported.  The first member of each family is also run along the
    dilation orbit u(lambda r), whose ratio must be lambda-invariant.
    """
    _check_parity(N, m, parity)
    lo, hi = _theta_range(N, m, parity)
    label = FAMILY_RELATIVE if lo - 1e-12 <= theta <= hi + 1e-12 else OUT_OF_RANGE
    fams = _resolve_families(family, N, m, parity)

    rows, flags, fam_summary = [], [], {}
    passed = True
    for fam in fams:
        frows = _family_rows(fam, N, m, theta, parity, n)
        for r in frows:
            if _accuracy_flags(r["flags"]):
                flags.append(f"{fam.name}:{r['params']}:accuracy")
        rows.extend(frows)
        fmin = _min_ratio(frows)
        floor = _floor_for(ratio_floor, fam.name)
        ok = fmin is not None and fmin >= floor
        summary = {"min_ratio": fmin, "ratio_floor": floor, "passed": ok}
        if refine:
            fine = _min_ratio(_family_rows(fam, N, m, theta, parity, 2 * n))
            drift = abs(fine - fmin) / fmin if fmin and fine is not None else None
            summary.update(min_ratio_refined=fine, drift=drift)
        if dilations:
            base = dict(fam.members[0])
            orbit = [dict(base, dilation=1.0)] + dilation_orbit(fam, base, dilations)
            orows = _family_rows(fam, N, m, theta, parity, n, orbit)
            vals = np.array([r["ratio"] for r in orows], dtype=float)
            spread = float((vals.max() - vals.min()) / abs(vals[0]))
            summary.update(dilation_ratios=vals.tolist(), dilation_spread=spread,
                           dilation_invariant=spread <= DILATION_RTOL)
        fam_summary[fam.name] = summary
        passed = passed and ok
    min_ratio = _min_ratio(rows)
    degenerate = sum("degenerate-input" in r["flags"] for r in rows)
    if degenerate:
        flags.append(f"degenerate-input:{degenerate}")
    passed = passed and not any(f.endswith(":accuracy") for f in flags)
    theorem = "radial-even" if parity == "even" else "radial-odd"
    drifts = [s["drift"] for s in fam_summary.values() if s.get("drift") is not None]
    return VerificationReport(
        theorem=theorem,
        parameters={"N": N, "m": m, "theta": theta, "parity": parity,
                    "theta_range": [lo, hi], "exponent": critical_exponent(N, m, parity)},
        rows=rows, min_ratio=min_ratio, passed=bool(passed), flags=flags,
        grid={"n": n, "kind": LOG_UNIFORM, "refined_n": 2 * n if refine else None},
        label=label, ratio_floor=ratio_floor if not isinstance(ratio_floor, dict) else RATIO_FLOOR,
        extra={"families": fam_summary, "max_drift": max(drifts) if drifts else None},
        config=config)


# ---------------------------------------------------------------------------
# best-constant estimation
# ---------------------------------------------------------------------------

def _objective(fam, N, m, theta, parity, n, mode):
    order = _build_order(m, parity)

    def f(x):
        params = fam.vector_to_params(x)
        try:
            u = fam.build(params, n, order)
            if mode == "rayleigh":
                rep = (deficit_even if parity == "even" else deficit_odd)(u, N, m, strict=False)
                val = rep.A / rep.weighted
            else:
                val = radial_row(u, N, m, theta, parity)["ratio"]
        except (ArithmeticError, ValueError, FloatingPointError):
            return PENALTY
        if val is None or not math.isfinite(val):
            return PENALTY
        return float(val)

    return f


def _family_seed(seed, name):
    return (int(seed) * 1000003 + zlib.crc32(name.encode())) % (2 ** 32)


def _search_family(fam, N, m, theta, parity, n, mode, budget, starts, seed):
    """Multi-start bounded Nelder-Mead over one family's parameter box."""
    f = _objective(fam, N, m, theta, parity, n, mode)
    lo = np.array([b[0] for b in fam.bounds], dtype=float)
    hi = np.array([b[1] for b in fam.bounds], dtype=float)
    rng = np.random.default_rng(_family_seed(seed, fam.name))

    # seed points: the best members first, the rest uniform in the box
    member_x = [np.array([p[k] for k in fam.param_names], dtype=float) for p in fam.members]
    member_x = [np.clip(x, lo, hi) for x in member_x]
    scored = sorted(((f(x), i) for i, x in enumerate(member_x)))
    x0s = [member_x[i] for _, i in scored[: max(1, starts // 2)]]
    while len(x0s) < starts:
        x0s.append(lo + (hi - lo) * rng.random(lo.size))
    per_start = max(10, (budget - len(member_x)) // starts)

    def run(x0):
        res = optimize.minimize(f, x0, method="Nelder-Mead", bounds=list(zip(lo, hi)),
                                options={"maxfev": per_start, "xatol": 1e-6, "fatol": 1e-10})
        return float(res.fun), res.x, int(res.nfev), bool(res.success)

    results = parallel_map(run, x0s)
    best_member = scored[0]
    best = min(results, key=lambda t: t[0])
    evals = len(member_x) + sum(r[2] for r in results)
    if best_member[0] < best[0]:
        best = (best_member[0], member_x[best_member[1]], 0, True)
    return {"family": fam.name, "value": best[0], "params": fam.vector_to_params(best[1]),
            "evaluations": evals, "stagnated": not best[3],
            "starts": [r[0] for r in results]}


def estimate_best_constant(N, m, theta=None, parity="even", budget=OPT_BUDGET,
                           starts=OPT_STARTS, seed=0, family="all", mode="interpolation",
                           n=1024, config=None) -> VerificationReport:
    """Smallest ratio found over the parameter boxes of the given families.

    ``mode='interpolation'`` minimizes the interpolation ratio at ``theta``;
    ``mode='rayleigh'`` minimizes A / W (the Rellich quotient), whose
    infimum is the sharp constant.  Each family gets an equal share of the
    budget and a seed derived from its name, so adding a family can only
    lower the reported minimum.
    """
    _check_parity(N, m, parity)
    if mode not in ("interpolation", "rayleigh"):
        raise ParameterError(f"mode must be 'interpolation' or 'rayleigh', got {mode!r}")
    if mode == "interpolation" and theta is None:
        raise ParameterError("interpolation mode needs theta")
    if mode == "rayleigh" and family == "all":
        family = "cutoff"
    lo, hi = _theta_range(N, m, parity)
    label = FAMILY_RELATIVE
    if mode == "interpolation" and not (lo - 1e-12 <= theta <= hi + 1e-12):
        label = OUT_OF_RANGE
    fams = _resolve_families(family, N, m, parity)
    share = max(starts * 10, budget // len(fams))
    rows = [_search_family(fam, N, m, theta, parity, n, mode, share, starts, seed) for fam in fams]
    best = min(rows, key=lambda r: r["value"])
    flags = [f"{r['family']}:stagnation" for r in rows if r["stagnated"]]
    extra = {"best": best, "mode": mode}
    if mode == "rayleigh":
        const = sc.c1(N, m) if parity == "even" else sc.c2(N, m)
        extra.update(sharp_constant=const, excess=best["value"] / const - 1.0)
    for r in rows:
        r["ratio"] = r["value"]
        r["flags"] = ["stagnation"] if r["stagnated"] else []
    return VerificationReport(
        theorem="estimate-" + ("radial-even" if parity == "even" else "radial-odd"),
        parameters={"N": N, "m": m, "theta": theta, "parity": parity, "budget": budget,
                    "starts": starts, "seed": seed},
        rows=rows, min_ratio=best["value"], passed=bool(best["value"] > 0), flags=flags,
        grid={"n": n, "kind": LOG_UNIFORM}, label=label, extra=extra, config=config)


# ---------------------------------------------------------------------------
# theta scan
# ---------------------------------------------------------------------------

def default_thetas(N, m, parity="even"):
    lo, hi = _theta_range(N, m, parity)
    base = np.linspace(0.0, 1.0, 21).tolist() + [0.5 / N, lo, hi]
    return sorted({round(t, 12) for t in base})


def _decade_stats(params, ratios):
    """Drop factor and spread of the running inf over the final decade."""
    t = np.asarray(params, dtype=float)
    inf = np.minimum.accumulate(np.asarray(ratios, dtype=float))
    end = t[-1]
    j = int(np.argmin(np.abs(np.log10(t) - (math.log10(end) + 1.0))))
    window = np.asarray(ratios, dtype=float)[j:]
    return {"decade_drop": float(inf[j] / inf[-1]),
            "decade_spread": float(window.max() / window.min()),
            "decade_start": float(t[j]), "decade_end": float(end)}


def theta_scan(N, m, parity="even", family="shell", thetas=None, n=DEFAULT_N,
               dilations=DILATIONS, config=None) -> VerificationReport:
    """Inf ratio along a degenerating sequence for theta across [0, 1].

    ``shell`` concentrates on the unit sphere as sigma -> 0 (this probes the
    lower end 1/N), ``cutoff`` approaches the Rellich extremal as eps -> 0
    (upper end).  The sequence parameter runs in the stored member order.
    Every ratio is also checked along the dilation orbit of the first
    member, which leaves it unchanged for all theta.
    """
    _check_parity(N, m, parity)
    fams = _resolve_families(family, N, m, parity)
    if len(fams) != 1:
        raise ParameterError("theta_scan takes a single degenerating family")
    fam = fams[0]
    key = {"shell": "sigma", "cutoff": "eps"}.get(fam.name, fam.param_names[0])
    members = list(fam.members)
    if fam.name == "cutoff":
        members = [{"eps": float(e), "w": 4.0} for e in 10.0 ** np.linspace(-0.5, -2.0, 7)]
    order = _build_order(m, parity)
    terms = parallel_map(lambda p: radial_terms(fam.build(p, n, order), N, m, parity), members)
    orbit = parallel_map(lambda p: radial_terms(fam.build(p, n, order), N, m, parity),
                         [dict(members[0], dilation=1.0)] + dilation_orbit(fam, members[0], dilations))
    lo, hi = _theta_range(N, m, parity)
    thetas = default_thetas(N, m, parity) if thetas is None else sorted(thetas)
    params = [p[key] for p in members]
    rows = []
    for th in thetas:
        ratios = [ratio_from_terms(t, th)["ratio"] for t in terms]
        orb = np.array([ratio_from_terms(t, th)["ratio"] for t in orbit])
        row = {"theta": th, "inf_ratio": float(min(ratios)), "ratios": ratios,
               "admissible": bool(lo - 1e-12 <= th <= hi + 1e-12),
               "dilation_spread": float((orb.max() - orb.min()) / orb[0]),
               "flags": sorted({f for t in terms for f in _accuracy_flags(t["flags"])})}
        row.update(_decade_stats(params, ratios))
        rows.append(row)
    return VerificationReport(
        theorem="theta-scan", parameters={"N": N, "m": m, "parity": parity, "family": fam.name,
                                          "sequence": key, "sequence_values": params},
        rows=rows, min_ratio=min((r["inf_ratio"] for r in rows if r["admissible"]), default=None),
        passed=True, grid={"n": n, "kind": LOG_UNIFORM}, label="desk-scale evidence",
        config=config)


# ---------------------------------------------------------------------------
# Lorentz-norm interpolation
# ---------------------------------------------------------------------------

_REL = 1e-12


def admissible_params(N, p, q, r, theta) -> dict:
    """Validate (N, p, q, r, theta) for the Lorentz interpolation inequality.

    Raises DomainError naming the first violated constraint; otherwise returns
    the derived quantities p*, beta = q theta / (1 - q theta) and the bounds.
    """
    def need(ok, name, detail):
        if not ok:
            raise DomainError(f"requires {name} ({detail})", name)

    need(2 <= q, "2 <= q", f"got q={q}")
    need(q <= p, "q <= p", f"got q={q}, p={p}")
    need(p < N, "p < N", f"got p={p}, N={N}")
    r_expected = N * q / (N - p)
    need(abs(r - r_expected) <= _REL * r_expected, "r = Nq/(N-p)",
         f"got r={r}, Nq/(N-p)={r_expected}")
    r_lo = max(N / (N - p), p)
    r_hi = min(N * p / (N - p) ** 2, N * p / (N - p))
    need(r >= r_lo * (1 - _REL), "r >= max{N/(N-p), p}", f"got r={r}, bound={r_lo}")
    need(r <= r_hi * (1 + _REL), "r <= min{Np/(N-p)^2, Np/(N-p)}", f"got r={r}, bound={r_hi}")
    t_lo, t_hi = (N - p) / N, p / (N * q)
    need(theta >= t_lo - _REL, "theta >= (N-p)/N", f"got theta={theta}, bound={t_lo}")
    need(theta <= t_hi + _REL, "theta <= p/(Nq)", f"got theta={theta}, bound={t_hi}")
    beta = q * theta / (1 - q * theta)
    return {"p_star": N * p / (N - p), "beta": beta, "r_bounds": [r_lo, r_hi],
            "theta_bounds": [t_lo, t_hi], "beta_budget": (beta + 1) * q,
            "q_max": N / (N - p)}


def lorentz_corpus(N, p, n=DEFAULT_N) -> list:
    """Radial nonincreasing profiles with finite Lorentz and weighted norms."""
    grid = make_grid(LOG_UNIFORM, 1e-6, 1e4, n)
    a_min = 0.5 * (N / p - 1.0)
    out = []
    for w in (0.5, 1.0, 2.0):
        out.append((f"gaussian(width={w})", GAUSSIAN.profile(grid, 2, dilation=1.0 / w)))
    out.append(("exponential", EXPONENTIAL.profile(grid, 2)))
    for da in (0.5, 1.0, 2.0):
        a = a_min + da
        out.append((f"rational(a={a:g})", RATIONAL.profile(grid, 2, a=a)))
    for lam in DILATIONS:
        out.append((f"gaussian(dilation={lam})", GAUSSIAN.profile(grid, 2, dilation=lam)))
    return out


def lorentz_terms(u: RadialProfile, N, p, q, r) -> dict:
    """||grad u||_{p,q}^q, the Hardy term and the weighted integral for radial
    nonincreasing u (the supremum over translations sits at the origin)."""
    S = sphere_area(N)
    w = sc.omega(N)
    du = derivative(u, 1)
    A_int = power_integral(du.values, u.grid, q, N - 1 - N * (1 - q / p))
    W_int = power_integral(u.values, u.grid, q, N - 1 - (N + q - N * q / p))
    A = w ** (q / p - 1) * S * A_int.value
    W = S * W_int.value
    B = sc.lorentz_hardy_constant(N, p, q) * W
    rhs = lorentz_norm(u, N, N * p / (N - p), r)
    flags = [f"A:{f}" for f in A_int.flags] + [f"W:{f}" for f in W_int.flags] + \
        [f"rhs:{f}" for f in rhs.flags]
    return {"A": A, "B": B, "weighted": W, "rhs": rhs.value ** q,
            "eps_quad": EPS_QUAD_REL * abs(A), "flags": flags}


def verify_lorentz_interpolation(N, p, q, r, theta, family="lorentz", n=DEFAULT_N,
                                 ratio_floor=RATIO_FLOOR, config=None) -> VerificationReport:
    """(||grad u||_{p,q}^q - B)^theta W^{1-theta} >= C ||u||_{L^{p*,r}}^q on the
    radial nonincreasing corpus; inadmissible tuples raise DomainError."""
    info = admissible_params(N, p, q, r, theta)
    if family != "lorentz":
        raise ParameterError("the Lorentz runner uses the built-in nonincreasing corpus 'lorentz'")
    corpus = lorentz_corpus(N, p, n)

    def one(item):
        name, u = item
        row = {"profile": name, "flags": []}
        v = u.values
        if not (np.all(v >= 0) and np.all(np.diff(v) <= 1e-14 * v.max())):
            row.update(lhs=None, rhs=None, ratio=None, flags=["not-nonincreasing"])
            return row
        t = lorentz_terms(u, N, p, q, r)
        deficit = t["A"] - t["B"]
        lhs = interpolation_value(deficit, t["weighted"], theta)
        row.update(A=t["A"], B=t["B"], deficit=deficit, weighted=t["weighted"], lhs=lhs,
                   rhs=t["rhs"], ratio=lhs / t["rhs"],
                   case="case1" if (1 - theta) * t["A"] >= t["B"] else "case2",
                   flags=t["flags"] + (["negative-deficit"] if deficit < -t["eps_quad"] else []))
        return row

    rows = parallel_map(one, corpus)
    min_ratio = _min_ratio(rows)
    orbit = [r_["ratio"] for r_ in rows if r_["profile"].startswith("gaussian(dilation")]
    orbit.append(next(r_["ratio"] for r_ in rows if r_["profile"] == "gaussian(width=1.0)"))
    spread = float((max(orbit) - min(orbit)) / orbit[-1])
    flags = [f"{r_['profile']}:accuracy" for r_ in rows if _accuracy_flags(r_["flags"])]
    passed = min_ratio is not None and min_ratio >= ratio_floor and not flags
    return VerificationReport(
        theorem="lorentz", parameters={"N": N, "p": p, "q": q, "r": r, "theta": theta, **info},
        rows=rows, min_ratio=min_ratio, passed=bool(passed), flags=flags,
        grid={"n": n, "kind": LOG_UNIFORM}, ratio_floor=ratio_floor,
        extra={"dilation_spread": spread}, config=config)


# ---------------------------------------------------------------------------
# reduction chain for non-radial inputs
# ---------------------------------------------------------------------------

_GL16_X, _GL16_W = np.polynomial.legendre.leggauss(16)


def sphere_mean_kernel(rho, a, N, gamma) -> np.ndarray:
    """Mean of |x - y|^{-gamma} over |x| = rho with |y| = a.

    Equals max^{-gamma} 2F1(gamma/2, gamma/2 - N/2 + 1; N/2; (min/max)^2).
    """
    rho = np.asarray(rho, dtype=float)
    big = np.maximum(rho, a)
    # the log singularity at rho = a is integrable; keep nodes off it
    z = np.minimum((np.minimum(rho, a) / big) ** 2, 1.0 - 1e-12)
    return big ** (-gamma) * hyp2f1(0.5 * gamma, 0.5 * gamma - 0.5 * N + 1.0, 0.5 * N, z)


def translated_weighted_integral(u: RadialProfile, N, gamma, a, power=2.0) -> float:
    """int |u(x)|^power |x - y|^{-gamma} dx for radial u and |y| = a.

    a = 0 uses the grid rule; a > 0 integrates in s = ln rho on Gauss-Legendre
    panels graded geometrically toward the kernel singularity at rho = a.
    """
    if a == 0.0:
        res = power_integral(u.values, u.grid, power, N - 1 - gamma)
        return sphere_area(N) * res.value
    s0, s1 = float(u.grid.s[0]), float(u.grid.s[-1])
    sa = math.log(a)
    brk = set(np.arange(s0, s1, 0.25).tolist()) | {s1}
    if s0 < sa < s1:
        for k in range(1, 35):
            d = 0.25 * 2.0 ** (-k)
            brk.update((sa - d, sa + d))
        brk.add(sa)
    brk = np.array(sorted(b for b in brk if s0 <= b <= s1))
    mid = 0.5 * (brk[1:] + brk[:-1])
    half = 0.5 * np.diff(brk)
    s = (mid[:, None] + half[:, None] * _GL16_X[None, :]).ravel()
    w = (half[:, None] * _GL16_W[None, :]).ravel()
    rho = np.exp(s)
    U = np.abs(evaluate(u, rho))
    body = np.sum(w * U ** power * rho ** N * sphere_mean_kernel(rho, a, N, gamma))
    # below r_min the profile is frozen and the kernel is ~ a^{-gamma}
    r0 = u.grid.nodes[0]
    head = abs(u.values[0]) ** power * r0 ** N / N * a ** (-gamma) if a > r0 else 0.0
    return sphere_area(N) * float(body + head)


def translation_sup(u: RadialProfile, N, gamma, power=2.0, points=33) -> tuple[float, float]:
    """sup over |y| of the translated weighted integral: (value, argmax |y|)."""
    peaks, _ = local_maxima(u)
    scale = float(np.median(peaks)) if len(peaks) else 1.0
    cands = [0.0] + (scale * 10.0 ** np.linspace(-2, 2, points)).tolist()
    vals = [translated_weighted_integral(u, N, gamma, a, power) for a in cands]
    i = int(np.argmax(vals))
    best, arg = vals[i], cands[i]
    if i > 0:
        lo_a = cands[i - 1] if i > 1 else cands[1] / 10 ** (4 / (points - 1))
        hi_a = cands[i + 1] if i + 1 < len(cands) else cands[i] * 10 ** (4 / (points - 1))
        res = optimize.minimize_scalar(
            lambda t: -translated_weighted_integral(u, N, gamma, math.exp(t), power),
            bounds=(math.log(lo_a), math.log(hi_a)), method="bounded",
            options={"xatol": 1e-6})
        if -res.fun > best:
            best, arg = -res.fun, math.exp(res.x)
    return float(best), float(arg)


def _interval_integrals(s, y) -> np.ndarray:
    """Integrals of the cubic spline through (s, y) over each grid interval,
    formed locally so that tiny tails are not lost to cancellation."""
    c = CubicSpline(s, y).c
    h = np.diff(s)
    return c[0] * h ** 4 / 4 + c[1] * h ** 3 / 3 + c[2] * h ** 2 / 2 + c[3] * h


def _inverse_laplacian(values, grid, N) -> np.ndarray:
    """Decaying radial solution of -Delta w = g on R^N:
    w(r) = int_r^inf t^{1-N} int_0^t g s^{N-1} ds dt."""
    r, s = grid.nodes, grid.s
    head = values[0] * r[0] ** N / N
    inner = head + np.concatenate(([0.0], np.cumsum(_interval_integrals(s, values * r ** N))))
    flux = inner * r ** (1.0 - N)
    beta = math.log(abs(flux[-1] / flux[-2])) / (s[-1] - s[-2])
    if not beta < -1.0:
        raise DomainError("inverse Laplacian does not decay on this grid", "decay")
    tail = flux[-1] * r[-1] / (-beta - 1.0)
    pieces = _interval_integrals(s, flux * r)
    outer = np.concatenate((np.cumsum(pieces[::-1])[::-1], [0.0]))
    return outer + tail


def radial_potential(f: RadialProfile, N, m) -> RadialProfile:
    """v with (-Delta)^m v = f on R^N and v decaying (m nested inversions)."""
    vals = np.asarray(f.values, dtype=float)
    for _ in range(m):
        vals = _inverse_laplacian(vals, f.grid, N)
    return RadialProfile(f.grid, vals)


def _reduction_row(name, u, N, m, parity, gamma):
    row = {"profile": name, "checks": {}, "flags": []}
    S = sphere_area(N)
    sup_val, arg = translation_sup(u, N, gamma)
    us = decreasing_rearrangement(u, N)
    t_star = translated_weighted_integral(us, N, gamma, 0.0)
    f = iterated_laplacian(u, N, m) * ((-1.0) ** m)
    fstar = decreasing_rearrangement(f, N)
    # both parities: (-Delta)^m v = f*; the odd form is A = int |grad f|^2
    v = radial_potential(fstar, N, m)
    t_v = translated_weighted_integral(v, N, gamma, 0.0)
    crit = critical_exponent(N, m, parity)
    nu = power_integral(u.values, u.grid, crit, N - 1).value
    nus = power_integral(us.values, us.grid, crit, N - 1).value
    nv = power_integral(v.values, v.grid, crit, N - 1).value
    us_on_v = evaluate(us, v.r)
    c = row["checks"]
    c["hardy-littlewood"] = {"lhs": sup_val, "rhs": t_star, "argmax": arg,
                             "holds": sup_val <= t_star * (1 + CHAIN_RTOL)}
    c["weighted-comparison"] = {"lhs": t_star, "rhs": t_v, "holds": t_star <= t_v * (1 + CHAIN_RTOL)}
    gap = float(np.max(us_on_v - v.values) / np.max(v.values))
    c["pointwise-comparison"] = {"max_relative_excess": gap, "holds": gap <= CHAIN_RTOL}
    if parity == "even":
        e_f = squared_integral(f.values, f.grid, N - 1).value
        e_fs = squared_integral(fstar.values, fstar.grid, N - 1).value
        rel = abs(e_f - e_fs) / e_f
        c["energy-preservation"] = {"lhs": S * e_f, "rhs": S * e_fs, "relative_error": rel,
                                    "holds": rel <= PRESERVE_RTOL}
    else:
        g_f = squared_integral(derivative(f, 1).values, f.grid, N - 1).value
        g_fs = squared_integral(derivative(fstar, 1).values, fstar.grid, N - 1).value
        c["polya-szego"] = {"lhs": S * g_f, "rhs": S * g_fs,
                            "holds": g_fs <= g_f * (1 + CHAIN_RTOL)}
    rel = abs(nu - nus) / nu
    c["critical-norm-preservation"] = {"lhs": (S * nu) ** (1 / crit), "rhs": (S * nus) ** (1 / crit),
                                       "relative_error": rel, "holds": rel <= PRESERVE_RTOL}
    c["critical-norm-comparison"] = {"lhs": (S * nus) ** (1 / crit), "rhs": (S * nv) ** (1 / crit),
                                     "holds": nus <= nv * (1 + CHAIN_RTOL)}
    if name.startswith("nonincreasing"):
        t0 = translated_weighted_integral(u, N, gamma, 0.0)
        rel0 = abs(sup_val - t0) / t0
        c["first-link-equality"] = {"lhs": sup_val, "rhs": t0, "relative_error": rel0,
                                    "holds": rel0 <= CHAIN_RTOL}
    row["holds"] = all(v_["holds"] for v_ in c.values())
    return row


def planar_reduction_checks(domain="lshape", forcing_name="bump", n=64, gamma=1.0) -> dict:
    """Discrete 2D analogue (order one): translation sup versus the
    rearranged weighted sum, equimeasurability and the Talenti comparison."""
    from .rearrangement_comparison import (
        forcing,
        make_domain,
        rearrange_field,
        solve_poisson_2d,
        talenti_check,
    )
    grid = make_domain(domain, n)
    f = forcing(forcing_name, grid)
    u = solve_poisson_2d(f)
    h2 = grid.h ** 2
    X, Y = grid.coords
    pts = np.stack([X[grid.mask], Y[grid.mask]], axis=1)
    a2 = u.interior ** 2
    rho1 = math.sqrt(h2 / math.pi)
    self_w = 2 * math.pi * rho1 ** (2 - gamma) / (2 - gamma)
    best = 0.0
    for i0 in range(0, len(pts), 256):
        y = pts[i0:i0 + 256]
        d = np.sqrt(((pts[None, :, :] - y[:, None, :]) ** 2).sum(-1))
        with np.errstate(divide="ignore"):
            w = np.where(d > 0, h2 * d ** (-gamma), self_w)
        best = max(best, float((w @ a2).max()))
    us = rearrange_field(u)
    k = np.arange(us.values.size + 1)
    rk = np.sqrt(k * h2 / math.pi)
    ann = 2 * math.pi * np.diff(rk ** (2 - gamma)) / (2 - gamma)
    t_star = float(np.sum(us.values ** 2 * ann))
    fs = rearrange_field(f)
    tal = talenti_check(f, 1, forcing_name)
    checks = {
        "hardy-littlewood": {"lhs": best, "rhs": t_star, "holds": best <= t_star * (1 + 1e-12)},
        "energy-preservation": {"lhs": float(np.sum(f.interior ** 2) * h2),
                                "rhs": float(np.sum(fs.values ** 2) * h2)},
        "norm-preservation": {"lhs": float(np.sum(u.interior ** 4) * h2),
                              "rhs": float(np.sum(us.values ** 4) * h2)},
        "pointwise-comparison": {"violation": tal.violation, "tolerance": tal.tolerance,
                                 "holds": tal.passed},
    }
    for key in ("energy-preservation", "norm-preservation"):
        e = checks[key]
        e["holds"] = abs(e["lhs"] - e["rhs"]) <= 1e-12 * abs(e["lhs"])
    return {"profile": f"planar:{domain}:{forcing_name}:n={n}", "checks": checks,
            "holds": all(c["holds"] for c in checks.values()), "flags": []}


def reduction_corpus(N, n=DEFAULT_N, count=6, seed=3) -> list:
    """Two-bump profiles (sign-changing allowed) plus one nonincreasing profile."""
    from .families import bump_family
    fam = bump_family(N, 1, count=count, seed=seed)
    out = [(f"two-bump:{i}", fam.build(p, n, 6)) for i, p in enumerate(fam.members)]
    grid = make_grid(LOG_UNIFORM, 1e-4, 1e4, n)
    out.append(("nonincreasing:gaussian", GAUSSIAN.profile(grid, 6)))
    return out


def verify_nonradial_reduction(N, m, theta=None, parity="even", n=REDUCTION_N, planar=True,
                               planar_n=64, config=None) -> VerificationReport:
    """Check each link of the rearrangement reduction on desk-scale inputs.

    Radial multi-bump inputs test, for |y| ranging over a ray,
        sup_y int |u|^2 |x-y|^{-g} <= int |u*|^2 |x|^{-g} <= int |v|^2 |x|^{-g},
    with g = 4m (even) or 4m+2 (odd), v the radial solution of
    (-Delta)^m v = f*, f = (-Delta)^m u, plus u* <= v, preservation of the
    critical norm and of int |f|^2 (even) or Polya-Szego for grad f (odd).
    ``planar`` adds the order-one 2D analogue on a finite-difference grid.
    """
    _check_parity(N, m, parity)
    need_N = 4 * m + 1 if parity == "even" else 4 * m + 3
    if N != need_N:
        raise DomainError(f"requires N = {need_N} for parity {parity} (got N={N}, m={m})",
                          "N = 1/theta")
    if theta is None:
        theta = 1.0 / N
    if abs(theta - 1.0 / N) > 1e-12:
        raise DomainError(f"requires theta = 1/N = {1.0 / N} (got theta={theta})", "theta = 1/N")
    gamma = 4 * m if parity == "even" else 4 * m + 2
    corpus = reduction_corpus(N, n)
    rows = parallel_map(lambda item: _reduction_row(item[0], item[1], N, m, parity, gamma), corpus)
    if planar:
        rows.append(planar_reduction_checks(n=planar_n))
    for r in rows:
        r["ratio"] = None
    passed = all(r["holds"] for r in rows)
    return VerificationReport(
        theorem="reduction-" + parity,
        parameters={"N": N, "m": m, "theta": theta, "parity": parity, "gamma": gamma},
        rows=rows, min_ratio=None, passed=bool(passed), flags=["reduced-scope"],
        grid={"n": n, "kind": LOG_UNIFORM, "planar_n": planar_n if planar else None},
        label="chain-check",
        extra={"scope": "radial multi-bump inputs and the planar order-one analogue; "
                        "general non-radial higher-order inputs are not searched"},
        config=config)
