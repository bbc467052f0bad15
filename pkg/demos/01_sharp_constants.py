"""
Sharp constants
===============

The Rellich constants C1(N, m) and C2(N, m) are finite products, so they can
be tabulated exactly and checked against their one-step recurrence.
"""
from fractions import Fraction

from ineqforge import sharp_constants as sc

# the second-order Rellich constant at N = 5 is N^2 (N - 4)^2 / 16
print("c1(5, 1) =", Fraction(sc.c1(5, 1)))

# m = 0 in the odd case is the classical Hardy constant (N - 2)^2 / 4
for N in range(3, 9):
    print(f"N={N}  c2(N, 0)={sc.c2(N, 0):g}  hardy={(N - 2) ** 2 / 4:g}")

# each extra Laplacian multiplies C1 by ((N + 4m - 4)(N - 4m) / 4)^2
N = 17
for m in (2, 3, 4):
    step = ((N + 4 * m - 4) * (N - 4 * m) / 4) ** 2
    print(f"m={m}  C1 ratio={sc.c1(N, m) / sc.c1(N, m - 1):.6g}  predicted={step:.6g}")

# everything for one (N, m) in a single dict
print(sc.all_constants(9, 2))
