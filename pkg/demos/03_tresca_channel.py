"""Channel flow with Tresca friction on the top and bottom walls.

The side walls carry a prescribed profile; on the horizontal walls the
fluid may slip once the tangential stress reaches g.  ALG2 alternates a
Stokes solve, a pointwise projection and a multiplier update.
"""
import numpy as np

from tresca_stokes import alg2_solve, test2_case
from tresca_stokes.io import write_gamma_profile, write_solution_vtk

case = test2_case(g=0.015)
mesh = case.mesh(32)
dofmap = case.dofmap(mesh)
result = alg2_solve(mesh, dofmap, case.config(), trace_csv="alg2_trace.csv")
sol = result.solution
print(f"ALG2: {result.iterations} sweeps, converged={result.converged}")

lam, ut = sol.multiplier, sol.tangential_velocity()
g = case.g
sticking = np.abs(lam) < g - 1e-12
print(f"|lambda| <= g everywhere: {np.all(np.abs(lam) <= g + 1e-12)}")
print(f"slipping dofs {np.sum(~sticking)}, sticking dofs {np.sum(sticking)}")
print(f"max slip velocity {np.abs(ut).max():.3e}")

# The same walls with a huge threshold stick everywhere.
stuck = alg2_solve(mesh, dofmap, case.config(g=1e3))
print(f"g = 1e3: max |u_t| = {np.abs(stuck.solution.tangential_velocity()).max():.2e}")

write_solution_vtk(sol, "channel_solution.vtk")
write_gamma_profile(sol, "channel_gamma.csv")
print("wrote channel_solution.vtk, channel_gamma.csv, alg2_trace.csv")
