"""Text outputs: legacy VTK, Gamma profiles, MatrixMarket."""
from __future__ import annotations

import csv

import numpy as np
import scipy.io

from .mesh import GAMMA, Mesh

_LABEL_CODE = {"Gamma0": 0, GAMMA: 1}


def _points_block(fh, mesh: Mesh) -> None:
    fh.write(f"POINTS {mesh.n_vertices} double\n")
    for x, y in mesh.vertices:
        fh.write(f"{x:.16e} {y:.16e} 0\n")


def write_mesh_vtk(mesh: Mesh, path) -> None:
    """Triangles plus boundary edges as line cells; cell data ``label`` is
    -1 on triangles, 0 on Gamma0 and 1 on Gamma edges."""
    nt, ne = mesh.n_triangles, len(mesh.edges)
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\ntresca_stokes mesh\nASCII\n")
        fh.write("DATASET UNSTRUCTURED_GRID\n")
        _points_block(fh, mesh)
        fh.write(f"CELLS {nt + ne} {4 * nt + 3 * ne}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"3 {a} {b} {c}\n")
        for a, b in mesh.edges:
            fh.write(f"2 {a} {b}\n")
        fh.write(f"CELL_TYPES {nt + ne}\n")
        fh.write("5\n" * nt + "3\n" * ne)
        fh.write(f"CELL_DATA {nt + ne}\nSCALARS label int 1\nLOOKUP_TABLE default\n")
        fh.write("-1\n" * nt)
        for lab in mesh.edge_label:
            fh.write(f"{_LABEL_CODE[lab]}\n")


def write_solution_vtk(solution, path) -> None:
    """Vertex velocity (P1 part) and pressure as point data."""
    mesh = solution.dofmap.mesh
    u = solution.vertex_velocity()
    nt = mesh.n_triangles
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\ntresca_stokes solution\nASCII\n")
        fh.write("DATASET UNSTRUCTURED_GRID\n")
        _points_block(fh, mesh)
        fh.write(f"CELLS {nt} {4 * nt}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"3 {a} {b} {c}\n")
        fh.write(f"CELL_TYPES {nt}\n" + "5\n" * nt)
        fh.write(f"POINT_DATA {mesh.n_vertices}\nVECTORS velocity double\n")
        for ux, uy in u:
            fh.write(f"{ux:.16e} {uy:.16e} 0\n")
        fh.write("SCALARS pressure double 1\nLOOKUP_TABLE default\n")
        for p in solution.pressure:
            fh.write(f"{p:.16e}\n")


def write_gamma_profile(solution, path) -> None:
    """CSV of (arclength, u_t, phi, lambda) at the multiplier dofs."""
    dm = solution.dofmap
    s = dm.gamma_arclength()
    order = np.argsort(s, kind="stable")
    ut = solution.tangential_velocity()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arclength", "u_t", "phi", "lambda"])
        for i in order:
            w.writerow([f"{s[i]:.10e}", f"{ut[i]:.10e}", f"{solution.slip[i]:.10e}",
                        f"{solution.multiplier[i]:.10e}"])


def write_matrix_market(system, path) -> None:
    """Dump the system matrix in MatrixMarket coordinate format."""
    matrix = getattr(system, "matrix", system)
    scipy.io.mmwrite(path, matrix.tocoo(), comment="tresca_stokes saddle-point matrix")
