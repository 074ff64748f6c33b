"""Plain Stokes with a manufactured solution.

The exact velocity is the curl of a smooth stream function, so it is
divergence free and vanishes on the boundary.  With every wall no-slip
the MINI element should give first order in H1 and second in L2.
"""
from tresca_stokes import noslip_case, run_study

case = noslip_case()
report = run_study(case, [8, 16, 32, 64])
print(report.to_csv())

last = report.rows[-1]
print(f"observed rates on the finest pair: H1 {last.alpha1:.2f}, L2 {last.alpha0:.2f}, "
      f"pressure {last.alphap:.2f}")
