"""Closed-form sharp constants of the Hardy-Rellich family.

Every product is formed factor by factor, each factor a ratio of small
integers, so rounding stays at a few ulps even for m = 3.
"""

from __future__ import annotations

import math

from .errors import DomainError
from .radial_core import ball_volume

OMEGA_CONVENTION = "unit-ball volume pi^{N/2}/Gamma(N/2+1)"


def _check_int(name, value, low):
    if int(value) != value or value < low:
        raise DomainError(f"{name} must be an integer >= {low}, got {value}", name)
    return int(value)


def c1(N, m) -> float:
    """Rellich constant for ||Delta^m u||^2 against |x|^{-4m}:
    (prod_{i<m} (N+4i)(N-4-4i)/4)^2.

    Raises DomainError unless N > 4m and m >= 1.
    """
    N = _check_int("N", N, 1)
    m = _check_int("m", m, 1)
    if N <= 4 * m:
        raise DomainError(f"requires N > 4m (got N={N}, m={m})", "N > 4m")
    prod = 1.0
    for i in range(m):
        prod *= (N + 4 * i) / 4.0 * (N - 4 - 4 * i)
    return prod * prod


def c2(N, m) -> float:
    """Constant for ||grad Delta^m u||^2 against |x|^{-4m-2}:
    ((N-2)/2)^2 (prod_{i<m} (N+2+4i)(N-6-4i)/4)^2.

    m = 0 gives the Hardy constant (N-2)^2/4.
    """
    N = _check_int("N", N, 1)
    m = _check_int("m", m, 0)
    if N <= 4 * m + 2:
        raise DomainError(f"requires N > 4m + 2 (got N={N}, m={m})", "N > 4m + 2")
    prod = 1.0
    for i in range(m):
        prod *= (N + 2 + 4 * i) / 4.0 * (N - 6 - 4 * i)
    half = (N - 2) / 2.0
    return half * half * prod * prod


def hardy_first_order(N) -> float:
    """(N-2)^2/4."""
    return c2(N, 0)


def gradient_chain_even(N, m) -> float:
    """4 C1(N,m)/(N-4m)^2, the constant in
    ||Delta^m u||^2 >= K ||grad u / |x|^{2m-1}||^2."""
    c = c1(N, m)
    d = (N - 4 * m) / 2.0
    return c / (d * d)


def gradient_chain_odd(N, m) -> float:
    """4 C2(N,m)/(N-4m)^2."""
    c = c2(N, m)
    if N == 4 * m:
        raise DomainError("requires N != 4m", "N != 4m")
    d = (N - 4 * m) / 2.0
    return c / (d * d)


def second_order_rellich(N) -> float:
    """N^2 (N-4)^2 / 16, equal to C1(N, 1)."""
    N = _check_int("N", N, 1)
    if N <= 4:
        raise DomainError(f"requires N > 4 (got N={N})", "N > 4m")
    a = N * (N - 4) / 4.0
    return a * a


def omega(N) -> float:
    """The normalising constant omega_N used in Lorentz quantities.

    Adopted as the volume of the unit ball; isolated here so the convention
    can be swapped in one place.
    """
    return ball_volume(N)


def lorentz_hardy_constant(N, p, q) -> float:
    """omega_N^{q/p-1} ((N-p)/p)^q for 1 <= q <= p < N."""
    if not (1 <= q <= p < N):
        raise DomainError(f"requires 1 <= q <= p < N (got N={N}, p={p}, q={q})",
                          "1 <= q <= p < N")
    return omega(N) ** (q / p - 1.0) * ((N - p) / p) ** q


def all_constants(N, m) -> dict:
    """Every constant defined for the pair (N, m); undefined entries are None."""
    out = {"N": N, "m": m, "omega_convention": OMEGA_CONVENTION}

    def attempt(key, fn, *args):
        try:
            out[key] = fn(*args)
        except DomainError as exc:
            out[key] = None
            out.setdefault("undefined", {})[key] = str(exc)

    attempt("hardy_first_order", hardy_first_order, N)
    attempt("c1", c1, N, m)
    attempt("c2", c2, N, m)
    attempt("gradient_chain_even", gradient_chain_even, N, m)
    attempt("gradient_chain_odd", gradient_chain_odd, N, m)
    attempt("second_order_rellich", second_order_rellich, N)
    out["sphere_area"] = 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)
    out["omega_N"] = omega(N)
    return out
