"""Command-line entry point.

Every subcommand writes JSON (or CSV where noted) that embeds its RunConfig
and the library version.  ``--config file.json`` replays a stored config, so
any report can be regenerated from the config it carries.

Exit codes: 0 pass, 1 verification failure, 2 usage, domain or accuracy error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from . import norms, quadratic_forms, sharp_constants, special_transforms, verifier_harness
from . import rearrangement_comparison as rc
from .errors import AccuracyError, IneqForgeError, ParameterError
from .families import EXPONENTIAL, GAUSSIAN, GAUSSIAN_POLY, RATIONAL, heat_kernel, log_bumps
from .radial_core import DEFAULT_N, LOG_UNIFORM, make_grid, read_profile
from .reports import RunConfig, dumps, rows_to_csv

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PROFILES = ("gaussian", "gaussian-poly", "rational", "exponential", "heat", "bumps", "indicator")
PLOT_KINDS = ("theta-scan", "talenti", "epsilon")


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

def _kv(desc: str) -> dict:
    out = {}
    for item in filter(None, desc.split(",")):
        if "=" not in item:
            raise ParameterError(f"expected key=value in {desc!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = float(v)
    return out


def named_profile(desc: str, N: float = 5, n: int = DEFAULT_N, order: int = 6):
    """Build a profile from ``name[:key=value,...]`` or load a two-column file.

    Names: gaussian (dilation), gaussian-poly (a, b), rational (a),
    exponential, heat (t), bumps (offset, sigma1, sigma2, weight), indicator
    (radius).
    """
    if os.path.exists(desc):
        return read_profile(desc)
    name, _, rest = desc.partition(":")
    kw = _kv(rest)
    allowed = {"gaussian": (), "gaussian-poly": ("a", "b"), "rational": ("a",), "exponential": (),
               "heat": ("t",), "bumps": ("offset", "sigma1", "sigma2", "weight"),
               "indicator": ("radius",)}
    if name in allowed:
        extra = set(kw) - set(allowed[name]) - ({"dilation"} if name != "indicator" else set())
        if extra:
            raise ParameterError(f"profile {name!r} does not take {sorted(extra)}")
    grid = make_grid(LOG_UNIFORM, 1e-4, 1e4, n)
    dil = kw.pop("dilation", 1.0)
    if name == "gaussian":
        return GAUSSIAN.profile(grid, order, dilation=dil)
    if name == "gaussian-poly":
        return GAUSSIAN_POLY.profile(grid, order, dilation=dil, a=kw.get("a", 0.0), b=kw.get("b", 0.0))
    if name == "rational":
        return RATIONAL.profile(grid, order, dilation=dil, a=kw.get("a", 2.0))
    if name == "exponential":
        return EXPONENTIAL.profile(grid, order, dilation=dil)
    if name == "heat":
        return heat_kernel(N, kw.get("t", 1.0), grid, order)
    if name == "bumps":
        c = -math.log(dil)
        return log_bumps(grid, [c, c + kw.get("offset", 1.0)],
                         [kw.get("sigma1", 0.5), kw.get("sigma2", 0.5)],
                         [1.0, kw.get("weight", 0.5)], order)
    if name == "indicator":
        return norms.indicator_profile(n, kw.get("radius", 1.0))
    raise ParameterError(f"unknown profile {name!r}; expected a file or one of {PROFILES}")


# ---------------------------------------------------------------------------
# plot data
# ---------------------------------------------------------------------------

def emit_plot_data(report: dict, kind: str, path: str, theta: float | None = None) -> str:
    """Write a plain CSV series for plotting and return its path.

    ``theta-scan``: theta,inf_ratio from a scan-theta report.
    ``talenti``:    x,y,u_star,v from a talenti report with fields; the cells
                    of the rearranged field are laid out on the disk at their
                    mid-area radii with golden-angle spacing.
    ``epsilon``:    epsilon,ratio along the degenerating sequence of a
                    scan-theta report at ``theta`` (default: lowest admissible).
    """
    if kind not in PLOT_KINDS:
        raise ParameterError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    if kind == "theta-scan":
        if report.get("theorem") != "theta-scan":
            raise ParameterError("theta-scan plot needs a scan-theta report")
        rows = [{"theta": r["theta"], "inf_ratio": r["inf_ratio"]} for r in report["rows"]]
        cols = ["theta", "inf_ratio"]
    elif kind == "talenti":
        f = report.get("fields")
        if not f:
            raise ParameterError("talenti plot needs a report with fields")
        rho = np.asarray(f["rho"])
        phi = np.arange(rho.size) * math.pi * (3.0 - math.sqrt(5.0))
        rows = [{"x": float(a), "y": float(b), "u_star": float(u), "v": float(v)}
                for a, b, u, v in zip(rho * np.cos(phi), rho * np.sin(phi), f["u_star"], f["v"])]
        cols = ["x", "y", "u_star", "v"]
    else:
        if report.get("theorem") != "theta-scan":
            raise ParameterError("epsilon plot needs a scan-theta report")
        cand = [r for r in report["rows"] if r["admissible"]] or report["rows"]
        row = cand[0] if theta is None else min(report["rows"], key=lambda r: abs(r["theta"] - theta))
        seq = report["parameters"]["sequence_values"]
        rows = [{"epsilon": e, "ratio": q} for e, q in zip(seq, row["ratios"])]
        cols = ["epsilon", "ratio"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows, cols))
    return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_constants(a):
    out = sharp_constants.all_constants(a.N, a.m)
    return {"N": a.N, "m": a.m, "constants": out, "omega_convention": sharp_constants.OMEGA_CONVENTION}, True


def _cmd_deficit(a):
    u = named_profile(a.profile, a.N, a.n)
    fn = quadratic_forms.deficit_even if a.case == "even" else quadratic_forms.deficit_odd
    rep = fn(u, a.N, a.m, a.theta, strict=False)
    return rep.to_dict(), rep.nonnegative


def _cmd_transform(a):
    u = named_profile(a.profile, a.N, a.n)
    rho = [float(x) for x in a.rho.split(",")]
    sp = special_transforms.fourier_radial(u, a.N, rho)
    rows = [{"rho": float(r), "value": float(v)} for r, v in zip(sp.frequencies, sp.values)]
    return {"rows": rows, "N": a.N, "profile": a.profile}, True


def _cmd_norm(a):
    u = named_profile(a.profile, a.N, a.n)
    p = _kv(a.params or "")
    if a.kind == "lorentz":
        res = norms.lorentz_norm(u, a.N, p["p_star"], p.get("r", math.inf))
    elif a.kind == "morrey":
        res = norms.morrey_norm(u, a.N, p.get("p", 1.0), p["alpha"])
    elif a.kind == "besov":
        res = norms.besov_norm(u, a.N, p["s"])
    else:
        res = norms.critical_sobolev_norm(u, a.N, int(p.get("m", 1)), a.parity)
    return res.to_dict(), True


def _cmd_talenti(a):
    rep = rc.run_case(a.domain, a.forcing, a.k, a.n)
    return rep.to_dict(with_fields=bool(a.plot)), rep.passed


def _cmd_verify(a):
    if a.theorem in ("radial-even", "radial-odd"):
        rep = verifier_harness.verify_radial_interpolation(
            a.N, a.m, a.theta, a.family, "even" if a.theorem == "radial-even" else "odd",
            n=a.n, ratio_floor=a.ratio_floor, refine=not a.no_refine)
    else:
        if None in (a.p, a.q, a.r):
            raise ParameterError("the lorentz theorem needs --p, --q and --r")
        rep = verifier_harness.verify_lorentz_interpolation(
            a.N, a.p, a.q, a.r, a.theta, n=a.n, ratio_floor=a.ratio_floor)
    return rep.to_dict(), rep.passed


def _cmd_estimate(a):
    rep = verifier_harness.estimate_best_constant(
        a.N, a.m, a.theta, a.parity, budget=a.budget, starts=a.starts, seed=a.seed,
        family=a.family, mode=a.mode, n=a.n)
    return rep.to_dict(), rep.passed


def _cmd_scan(a):
    thetas = [float(x) for x in a.thetas.split(",")] if a.thetas else None
    rep = verifier_harness.theta_scan(a.N, a.m, a.parity, a.family, thetas, n=a.n)
    return rep.to_dict(), rep.passed


def _cmd_chain(a):
    if a.kind == "hardy-rellich":
        u = named_profile(a.profile, a.N, a.n)
        ch = quadratic_forms.hardy_rellich_chain(u, a.N, a.m)
        return {"terms": ch.terms, "links": ch.links, "eps": ch.eps, "holds": ch.holds,
                "flags": ch.flags}, ch.holds
    rep = verifier_harness.verify_nonradial_reduction(
        a.N, a.m, a.theta, a.parity, planar=not a.no_planar)
    return rep.to_dict(), rep.passed


def _common(p, N=True, m=True, n=True):
    if N:
        p.add_argument("--N", type=int, required=True, help="dimension")
    if m:
        p.add_argument("--m", type=int, default=1, help="order index")
    if n:
        p.add_argument("--n", type=int, default=DEFAULT_N, help="radial grid nodes")
    p.add_argument("--out", help="output path (.json or .csv); stdout if omitted")
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ineqforge",
                                 description="Numerical checks of Hardy-Rellich-Sobolev "
                                             "interpolation inequalities.")
    ap.add_argument("--version", action="version", version=f"ineqforge {__version__}")
    ap.add_argument("--config", help="JSON run config; replaces all other arguments")
    sub = ap.add_subparsers(dest="subcommand")

    p = _common(sub.add_parser("constants", help="sharp constants for (N, m)"), n=False)
    p.set_defaults(func=_cmd_constants)

    p = _common(sub.add_parser("deficit", help="leading form, weighted form and deficit"))
    p.add_argument("--case", choices=("even", "odd"), default="even")
    p.add_argument("--theta", type=float)
    p.add_argument("--profile", default="gaussian")
    p.set_defaults(func=_cmd_deficit)

    p = _common(sub.add_parser("transform", help="radial Fourier transform samples (CSV)"), m=False)
    p.add_argument("--profile", default="gaussian")
    p.add_argument("--rho", default="0,0.5,1,2,3", help="comma-separated frequencies")
    p.set_defaults(func=_cmd_transform)

    p = _common(sub.add_parser("norm", help="Lorentz, Morrey, Besov or critical Sobolev norm"), m=False)
    p.add_argument("--kind", choices=("lorentz", "morrey", "besov", "sobolev"), required=True)
    p.add_argument("--params", default="", help="key=value list: p_star,r | p,alpha | s | m")
    p.add_argument("--parity", choices=("even", "odd"), default="even")
    p.add_argument("--profile", default="gaussian")
    p.set_defaults(func=_cmd_norm)

    p = _common(sub.add_parser("talenti", help="2D comparison of u* and v"), N=False, m=False, n=False)
    p.add_argument("--domain", choices=rc.DOMAINS, default="square")
    p.add_argument("--forcing", choices=rc.FORCINGS, default="constant")
    p.add_argument("--k", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--n", type=int, default=64, help="grid cells per side")
    p.add_argument("--plot", help="CSV path for x,y,u_star,v")
    p.set_defaults(func=_cmd_talenti)

    p = _common(sub.add_parser("verify", help="interpolation inequality on a corpus"))
    p.add_argument("--theorem", choices=("radial-even", "radial-odd", "lorentz"), default="radial-even")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--family", default="all")
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--ratio-floor", type=float, default=verifier_harness.RATIO_FLOOR)
    p.add_argument("--no-refine", action="store_true", help="skip the grid-doubling rerun")
    p.set_defaults(func=_cmd_verify)

    p = _common(sub.add_parser("estimate", help="family-relative best-constant estimate"), n=False)
    p.add_argument("--theta", type=float)
    p.add_argument("--parity", choices=("even", "odd"), default="even")
    p.add_argument("--family", default="all")
    p.add_argument("--mode", choices=("interpolation", "rayleigh"), default="interpolation")
    p.add_argument("--budget", type=int, default=verifier_harness.OPT_BUDGET)
    p.add_argument("--starts", type=int, default=verifier_harness.OPT_STARTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1024, help="radial grid nodes")
    p.set_defaults(func=_cmd_estimate)

    p = _common(sub.add_parser("scan-theta", help="inf ratio along a degenerating sequence"))
    p.add_argument("--parity", choices=("even", "odd"), default="even")
    p.add_argument("--family", choices=("shell", "cutoff"), default="shell")
    p.add_argument("--thetas", help="comma-separated theta values")
    p.add_argument("--plot", help="CSV path for theta,inf_ratio")
    p.add_argument("--plot-epsilon", help="CSV path for epsilon,ratio")
    p.add_argument("--plot-theta", type=float, help="theta for --plot-epsilon")
    p.set_defaults(func=_cmd_scan)

    p = _common(sub.add_parser("chain-check", help="rearrangement reduction or Hardy-Rellich chain"),
                n=False)
    p.add_argument("--kind", choices=("reduction", "hardy-rellich"), default="reduction")
    p.add_argument("--parity", choices=("even", "odd"), default="even")
    p.add_argument("--theta", type=float)
    p.add_argument("--profile", default="gaussian")
    p.add_argument("--n", type=int, default=DEFAULT_N, help="radial grid nodes (hardy-rellich)")
    p.add_argument("--no-planar", action="store_true", help="skip the 2D analogue")
    p.set_defaults(func=_cmd_chain)
    return ap


_SKIP = {"func", "config", "out", "subcommand"}


def _config_from_args(a) -> RunConfig:
    params = {k: v for k, v in sorted(vars(a).items()) if k not in _SKIP}
    grid = {"n": params.get("n")}
    fmt = "csv" if a.out and a.out.endswith(".csv") else "json"
    return RunConfig(a.subcommand, params, grid, {}, int(params.get("seed") or 0), a.out, fmt)


def _argv_from_config(cfg: RunConfig) -> list:
    argv = [cfg.subcommand]
    for k, v in sorted(cfg.params.items()):
        if v is None or v is False:
            continue
        flag = "--" + k.replace("_", "-") if k not in ("N", "m", "n", "p", "q", "r", "k") else "--" + k
        argv.append(flag)
        if v is not True:
            argv.append(str(v))
    if cfg.output:
        argv += ["--out", cfg.output]
    return argv


def _write(payload: dict, a):
    if a.out and a.out.endswith(".csv"):
        rows = payload.get("rows")
        if not rows:
            raise ParameterError("this report has no tabular rows; use a .json output")
        text = rows_to_csv(rows, header_comment=payload)
    else:
        text = dumps(payload)
    if a.out:
        with open(a.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
        if a.config:
            with open(a.config, encoding="utf-8") as fh:
                text = fh.read()
            # CSV reports carry their config as a leading "# {...}" line
            raw = json.loads(text[1:text.index("\n")] if text.startswith("#") else text)
            cfg = RunConfig.from_dict(raw.get("config", raw))
            a = ap.parse_args(_argv_from_config(cfg))
        if not a.subcommand:
            ap.print_usage(sys.stderr)
            return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    except (OSError, ValueError, ParameterError) as exc:
        print(f"ineqforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = _config_from_args(a)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            payload, passed = a.func(a)
        payload = dict(payload)
        payload["config"] = cfg.to_dict()
        payload["version"] = __version__
        _write(payload, a)
        if getattr(a, "plot", None):
            emit_plot_data(payload, "talenti" if a.subcommand == "talenti" else "theta-scan", a.plot)
        if getattr(a, "plot_epsilon", None):
            emit_plot_data(payload, "epsilon", a.plot_epsilon, a.plot_theta)
    except (AccuracyError, IneqForgeError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else exc
        if isinstance(exc, KeyError):
            msg = f"missing parameter {msg!r}"
        print(f"ineqforge: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_PASS if passed else EXIT_FAIL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
