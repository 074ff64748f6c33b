"""Mixed P1-bubble/P1 Stokes solver with Tresca slip on part of the boundary.

The slip condition is handled by an augmented-Lagrangian Uzawa iteration
(ALG2); :mod:`tresca_stokes.harness` reproduces convergence studies.
"""
from .assembly import assemble_system, assemble_boundary_load
from .harness import (error_norms, eoc, noslip_case, run_study, test1_case,
                      test2_case)
from .linalg import factorize, solve
from .mesh import BoundarySpec, Mesh, boundary_arclength, structured_rect_mesh, tag_boundary
from .spaces import DofMap, FieldSolution, build_dofmap, interpolate
from .tresca import TrescaConfig, alg2_solve, slip_projection, stokes_solve

__version__ = "0.1.0"

__all__ = [
    "BoundarySpec", "DofMap", "FieldSolution", "Mesh", "TrescaConfig",
    "alg2_solve", "assemble_boundary_load", "assemble_system", "boundary_arclength",
    "build_dofmap", "eoc", "error_norms", "factorize", "interpolate", "noslip_case",
    "run_study", "slip_projection", "solve", "stokes_solve", "structured_rect_mesh",
    "tag_boundary", "test1_case", "test2_case",
]
