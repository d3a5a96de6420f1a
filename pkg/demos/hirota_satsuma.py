"""
Another equation: the coupled Hirota-Satsuma forms
==================================================

Any pair of even bilinear forms works.  The registered Hirota-Satsuma
entry carries integral constants c1, c2 so the conditions have room to
close; a custom system can be assembled from exponent tuples in the
same way.
"""

import math

from thetawave import (
    GivenParams,
    ResidualSystem,
    SeedConfig,
    builtin_system,
    custom_system,
    gauss_newton,
    initial_guess,
    oracle_check,
)

hs = builtin_system("hirota-satsuma")
print("F1 =", hs.f1.describe())
print("F2 =", hs.f2.describe())

given = GivenParams([2 * math.pi / 10], [0.46 * 2 * math.pi])
rs = ResidualSystem(hs, given)
rep = gauss_newton(rs, initial_guess(hs, given, SeedConfig(1.0, 1.0)))
x = rep.x_final
print(f"{rep.status}: |H| = {rep.h_norm:.1e}", x.to_dict())
print("oracle:", oracle_check(hs, rs.theta_params(x), x.c1, x.c2).max_normalized)

###############################################################################
# Terms are (coefficient, (e_t, e_z, e_x)); coefficients may be fractions.
kdv_like = custom_system(
    "kdv-pair",
    [(1, (1, 0, 1)), (1, (0, 0, 4))],
    [(1, (1, 1, 0)), ("1/3", (0, 1, 3))],
)
rs = ResidualSystem(kdv_like, given)
rep = gauss_newton(rs, initial_guess(kdv_like, given, SeedConfig(1.0, 1.0)))
print("custom system:", rep.status, f"|H| = {rep.h_norm:.1e}")
