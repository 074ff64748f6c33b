"""Convergence against a fine reference solve when no exact solution exists.

Coarse solutions are compared with a solve on a nested finer mesh.  The
side profile does not vanish at the top corners while the wall demands
zero normal velocity there, so the solution is not in H1 near those
corners and the observed H1 rate stays well below one.
"""
import sys

from tresca_stokes import run_study, test2_case

ref_n = int(sys.argv[1]) if len(sys.argv) > 1 else 128
report = run_study(test2_case(), [8, 16, 32], ref_n=ref_n)
print(report.to_csv())
