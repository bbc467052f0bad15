"""
Ground-state substitution
=========================

Writing u = phi f with phi a power of r turns the deficit of the Rellich
inequality into a single nonnegative integral.  Both sides are computed
independently on a log-uniform grid and compared on a random corpus.
"""
from ineqforge import quadratic_forms as qf
from ineqforge import radial_core as rc
from ineqforge.families import bump_corpus

# order=0 means every derivative comes from numerical differentiation
for n in (512, 2048):
    grid = rc.default_grid(n)
    errs = []
    for v in bump_corpus(20, seed=0, grid=grid, order=0):
        lhs, rhs = qf.groundstate_identity_2nd(v, 5)
        errs.append(abs(lhs - rhs) / abs(lhs))
    print(f"{n} nodes: worst relative mismatch {max(errs):.2e}")

# the deficit itself stays nonnegative
grid = rc.default_grid()
u = bump_corpus(1, seed=7, grid=grid)[0]
rep = qf.deficit_even(u, 5, 1, theta=0.3)
print(f"A={rep.A:.6g}  B={rep.B:.6g}  deficit={rep.deficit:.3e}")
print("deficit >= 0:", rep.deficit >= -rep.eps_quad)
