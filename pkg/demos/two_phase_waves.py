"""
Two-phase waves and the z-independent branch
============================================

With N = 2 there are 8 conditions for 7 unknowns, so the iteration is a
genuine least-squares problem.  Starting from the printed table values
recovers every row; one row has l = 0 and therefore v = v0.
"""

from thetawave import ResidualSystem, builtin_system, gauss_newton, reconstruct
from thetawave.field import GridSpec
from thetawave.tables import published_table

for row in published_table(3) + published_table(4):
    rs = ResidualSystem(builtin_system("coupled-ramani", row.v0), row.given())
    rep = gauss_newton(rs, row.solution())
    x = rep.x_final
    tag = "  (l = 0 branch)" if rep.degenerate_l_zero else ""
    print(f"{row.label}: |H| = {rep.h_norm:.1e}, omega = {x.omega.round(4)}, "
          f"l = {x.l.round(4)}, tau12 = {x.tau_off[0]:.4f}{tag}")

###############################################################################
# On the l = 0 branch theta does not depend on z, so v = v0 exactly and u
# solves the scalar Ramani equation.
row = published_table(3)[2]
rs = ResidualSystem(builtin_system("coupled-ramani", row.v0), row.given())
x = gauss_newton(rs, row.solution()).x_final
grid = reconstruct(rs.theta_params(x), rs.given, GridSpec((0, 20, 81), (0, 50, 81)))
print("max |v - v0| on the grid:", abs(grid.v - row.v0).max())
print("u range:", grid.u.min(), grid.u.max())
