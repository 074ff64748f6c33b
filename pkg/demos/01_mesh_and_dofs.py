"""Mesh, boundary labels and degrees of freedom.

Builds the channel geometry used for the friction problems, prints what
each side carries and writes the mesh to legacy VTK for a quick look.
"""
import numpy as np

from tresca_stokes import BoundarySpec, build_dofmap, structured_rect_mesh, tag_boundary
from tresca_stokes.harness import inflow_profile
from tresca_stokes.io import write_mesh_vtk
from tresca_stokes.mesh import GAMMA, boundary_arclength

mesh = tag_boundary(structured_rect_mesh(8, 8, 0.1, 0.1), BoundarySpec.channel())
print(f"{mesh.n_vertices} vertices, {mesh.n_triangles} triangles, h = {mesh.h:.4f}")
print(f"friction boundary length: {boundary_arclength(mesh, GAMMA):.3f}")

for side in ("bottom", "right", "top", "left"):
    normal = mesh.edge_normals[mesh.edge_side == side][0]
    print(f"  {side:6s} {mesh.spec.label(side):7s} outward normal {normal}")

dofmap = build_dofmap(mesh, inflow_profile)
print(f"velocity dofs {dofmap.n_velocity} (P1 + one bubble per triangle and component)")
print(f"fixed components {len(dofmap.fixed_dofs)}, pressure dofs {dofmap.n_pressure}, "
      f"tangential multiplier dofs {dofmap.n_multiplier}")

# Tangential traces: u_t = -u_x on the bottom, +u_x on the top.
u = np.zeros(dofmap.n_velocity)
u[:mesh.n_vertices] = 1.0
print("u_t of a unit x-flow along Gamma:", np.unique(dofmap.tangential_trace(u)))

write_mesh_vtk(mesh, "channel_mesh.vtk")
print("wrote channel_mesh.vtk")
