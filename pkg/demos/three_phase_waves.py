"""
Three-phase waves
=================

Sixteen conditions, eleven unknowns.  Near machine precision the
residual stops improving; the solver reports ``stalled`` and keeps the
best iterate.  The l = 0 example converges much more slowly because the
normal matrix is close to singular there.
"""

import time

from thetawave import ResidualSystem, builtin_system, gauss_newton, oracle_check
from thetawave.tables import published

for table, row in ((5, 1), (6, 1), (5, 3)):
    r = published(table, row)
    rs = ResidualSystem(builtin_system("coupled-ramani", r.v0), r.given())
    start = time.perf_counter()
    rep = gauss_newton(rs, r.solution())
    dt = time.perf_counter() - start
    x = rep.x_final
    check = oracle_check(rs.system, rs.theta_params(x), x.c1, x.c2)
    print(f"{r.label}: status={rep.status}, iterations={rep.iterations}, |H|={rep.h_norm:.1e}, "
          f"regularized steps={rep.regularized_steps}, oracle={check.max_normalized:.1e}, {dt:.1f} s")
    print("   omega =", x.omega.round(4), " l =", x.l.round(4), " c =", round(x.c1, 4), round(x.c2, 4))
