"""How the slip threshold changes the manufactured flow and ALG2's work.

The manufactured field has zero velocity on the walls, so with a large
threshold the friction walls behave as no-slip and the exact solution is
recovered; small thresholds let the walls slip and the error grows.
"""
from tresca_stokes import test1_case
from tresca_stokes.harness import error_norms, solve_case

case = test1_case(strain_factor=1)
print(f"{'g':>8} {'|u-uh|_0':>11} {'|u-uh|_1':>11} {'|p-ph|_0':>11} sweeps")
for g in (0.0, 0.015, 10.0, 40.0):
    res = solve_case(case, 32, case.config(g=g))
    e0, e1, ep = error_norms(res.solution, case)
    print(f"{g:8.3f} {e0:11.4e} {e1:11.4e} {ep:11.4e} {res.iterations:6d}")
