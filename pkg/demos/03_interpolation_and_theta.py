"""
Interpolation ratios and theta
==============================

The interpolation quotient compares (A - B)^theta W^(1 - theta) with the
critical Sobolev norm.  Inside the admissible theta range its infimum over the
built-in families stays bounded away from zero; the theta scan shows how the
shell family behaves as the parameter runs over a decade.
"""
from ineqforge import verifier_harness as vh

for theta in (0.2, 0.4):
    rep = vh.verify_radial_interpolation(5, 1, theta, family="all")
    print(f"theta={theta}: min ratio {rep.min_ratio:.4g}  passed={rep.passed}  "
          f"max drift {rep.extra['max_drift']:.2e}")
    for name, s in rep.extra["families"].items():
        print(f"    {name:10s} min {s['min_ratio']:.4g}  dilation spread {s['dilation_spread']:.1e}")

# ratio change per decade of the shell parameter
scan = vh.theta_scan(5, 1, thetas=[0.0, 0.1, 0.2, 0.3, 0.4])
for row in scan.rows:
    print(f"theta={row['theta']:.1f}  admissible={row['admissible']!s:5s}  "
          f"drop per decade {row['decade_drop']:.4g}")

# a family-relative best-constant estimate (an upper bound, not the constant)
est = vh.estimate_best_constant(5, 1, 0.2, budget=300, starts=4, family="rational")
print("best ratio over the rational family:", est.min_ratio)
