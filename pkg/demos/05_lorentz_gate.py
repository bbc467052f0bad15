"""
Lorentz interpolation and its admissibility gate
================================================

The Lorentz version of the inequality needs a tight window of exponents.
The gate reports the first constraint that fails; admissible runs check
positivity of the ratio on a radially nonincreasing corpus.
"""
from ineqforge import norms as nm
from ineqforge import radial_core as rc
from ineqforge import verifier_harness as vh
from ineqforge.errors import DomainError

for args in [(5, 3, 2, 5, 0.4), (5, 4, 1.5, 7.5, 0.2), (5, 4, 2, 10, 0.1), (5, 4, 2, 10, 0.2)]:
    try:
        info = vh.admissible_params(*args)
        print(args, "admissible, theta in", info["theta_bounds"])
    except DomainError as exc:
        print(args, "rejected by", exc.constraint)

rep = vh.verify_lorentz_interpolation(5, 4, 2, 10, 0.2)
ratios = [row["ratio"] for row in rep.rows if row.get("ratio") is not None]
print(f"N=5 p=4 q=2 r=10: min ratio {min(ratios):.4g}  passed={rep.passed}")

# the indicator of a ball has a closed-form Lorentz norm
N, p_star, r = 5, 20.0, 10.0
vol = rc.ball_volume(N)
exact = (p_star / r) ** (1 / r) * vol ** (1 / p_star)
print("indicator:", nm.lorentz_norm(nm.indicator_profile(), N, p_star, r).value, "exact:", exact)
