"""Degrees of freedom for the MINI velocity, P1 pressure and P1 trace spaces.

Velocity coefficients are stored component-blocked::

    [ u_x at vertices | u_y at vertices | x-bubbles | y-bubbles ]

so a velocity vector has length ``2*(n_vertices + n_triangles)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import GAMMA, GAMMA0, Mesh

BUBBLE_SCALE = 27.0


def tangential_trace_sign(normal) -> tuple[int, int]:
    """Cartesian component and sign of the tangent ``t = (n_y, -n_x)``.

    Only axis-aligned normals are supported; returns ``(component, sign)`` so
    that ``u_t = sign * u[component]``.
    """
    nx_, ny_ = float(normal[0]), float(normal[1])
    t = np.array([ny_, -nx_])
    k = int(np.argmax(np.abs(t)))
    if not np.isclose(abs(t[k]), 1.0) or not np.isclose(t[1 - k], 0.0):
        raise ValueError(f"normal {normal} is not axis aligned")
    return k, int(np.sign(t[k]))


def _normal_component(normal) -> int:
    return int(np.argmax(np.abs(normal)))


@dataclass(frozen=True, eq=False)
class DofMap:
    mesh: Mesh
    fixed_dofs: np.ndarray      # constrained velocity dofs, sorted
    fixed_values: np.ndarray
    free_dofs: np.ndarray
    gamma_vertices: np.ndarray  # one multiplier dof per entry
    gamma_dofs: np.ndarray      # velocity dof carrying the tangential component
    gamma_signs: np.ndarray
    gamma_edges: np.ndarray     # Gamma edges as pairs of multiplier indices, -1 = none
    gamma_edge_lengths: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.mesh.n_vertices

    @property
    def n_triangles(self) -> int:
        return self.mesh.n_triangles

    @property
    def n_velocity(self) -> int:
        return 2 * (self.n_vertices + self.n_triangles)

    @property
    def n_pressure(self) -> int:
        return self.n_vertices

    @property
    def n_multiplier(self) -> int:
        return len(self.gamma_vertices)

    def bubble_dof(self, component: int) -> np.ndarray:
        nv, nt = self.n_vertices, self.n_triangles
        return 2 * nv + component * nt + np.arange(nt)

    def element_velocity_dofs(self) -> np.ndarray:
        """(n_triangles, 8) velocity dofs ordered ``x1 x2 x3 xb y1 y2 y3 yb``."""
        nv = self.n_vertices
        tri = self.mesh.triangles
        return np.column_stack([tri, self.bubble_dof(0), tri + nv, self.bubble_dof(1)])

    def tangential_trace(self, u: np.ndarray) -> np.ndarray:
        return self.gamma_signs * u[self.gamma_dofs]

    def gamma_arclength(self) -> np.ndarray:
        """Curvilinear abscissa of the multiplier dofs, sides concatenated."""
        s = np.zeros(self.n_multiplier)
        offset = 0.0
        mesh = self.mesh
        for side in ("bottom", "right", "top", "left"):
            if mesh.spec.label(side) != GAMMA:
                continue
            coord = 0 if side in ("bottom", "top") else 1
            start = np.isin(self.gamma_vertices, mesh.side_vertices(side))
            s[start] = offset + mesh.vertices[self.gamma_vertices[start], coord]
            offset += mesh.Lx if coord == 0 else mesh.Ly
        return s


def build_dofmap(mesh: Mesh, dirichlet: Callable | None = None) -> DofMap:
    """Number the dofs of ``mesh`` and tabulate velocity constraints.

    ``dirichlet(x, y)`` returns the two velocity components prescribed on
    Gamma0; omitted means homogeneous.  On Gamma the normal component is
    fixed to zero.  Vertices shared with Gamma0 follow the Gamma0 data.
    """
    nv = mesh.n_vertices
    verts = mesh.vertices
    g0 = np.unique(mesh.edges[mesh.edge_label == GAMMA0])

    fixed = {}
    if len(g0):
        if dirichlet is None:
            vals = np.zeros((2, len(g0)))
        else:
            vals = np.asarray(dirichlet(verts[g0, 0], verts[g0, 1]), dtype=float)
            vals = np.broadcast_to(vals, (2, len(g0)))
        if not np.all(np.isfinite(vals)):
            raise ValueError("Dirichlet data is not finite at a boundary vertex")
        for c in range(2):
            for v, val in zip(g0, vals[c]):
                fixed[c * nv + int(v)] = float(val)

    g0_set = set(g0.tolist())
    gamma_mask = mesh.edge_label == GAMMA
    # side memberships of every Gamma vertex not owned by Gamma0
    owner: dict[int, list[int]] = {}
    for e in np.flatnonzero(gamma_mask):
        n = mesh.edge_normals[e]
        for v in mesh.edges[e]:
            v = int(v)
            if v in g0_set:
                continue
            owner.setdefault(v, [])
            comp = _normal_component(n)
            if comp not in owner[v]:
                owner[v].append(comp)
            fixed[comp * nv + v] = 0.0

    # vertices on two Gamma sides have both components fixed: no trace dof
    gamma_vertices, gamma_dofs, gamma_signs = [], [], []
    for e in np.flatnonzero(gamma_mask):
        comp, sign = tangential_trace_sign(mesh.edge_normals[e])
        for v in mesh.edges[e]:
            v = int(v)
            if v in g0_set or len(owner[v]) > 1 or v in gamma_vertices:
                continue
            gamma_vertices.append(v)
            gamma_dofs.append(comp * nv + v)
            gamma_signs.append(sign)

    gamma_vertices = np.array(gamma_vertices, dtype=np.int64)
    order = np.lexsort((verts[gamma_vertices, 0] + verts[gamma_vertices, 1],
                        _side_rank(mesh, gamma_vertices)))
    gamma_vertices = gamma_vertices[order]
    gamma_dofs = np.array(gamma_dofs, dtype=np.int64)[order]
    gamma_signs = np.array(gamma_signs, dtype=float)[order]

    index = -np.ones(nv, dtype=np.int64)
    index[gamma_vertices] = np.arange(len(gamma_vertices))
    gamma_edges = index[mesh.edges[gamma_mask]].reshape(-1, 2)
    lengths = mesh.edge_lengths()[gamma_mask]

    fixed_dofs = np.array(sorted(fixed), dtype=np.int64)
    fixed_values = np.array([fixed[d] for d in fixed_dofs], dtype=float)
    n_vel = 2 * (nv + mesh.n_triangles)
    free = np.setdiff1d(np.arange(n_vel), fixed_dofs)
    return DofMap(mesh, fixed_dofs, fixed_values, free, gamma_vertices,
                  gamma_dofs, gamma_signs, gamma_edges, lengths)


def _side_rank(mesh: Mesh, vertices: np.ndarray) -> np.ndarray:
    rank = np.zeros(len(vertices), dtype=np.int64)
    for r, side in enumerate(("bottom", "right", "top", "left")):
        on = np.isin(vertices, mesh.side_vertices(side))
        rank[on & (rank == 0)] = r
    return rank


# ---------------------------------------------------------------- fields

@dataclass
class FieldSolution:
    """Discrete velocity, pressure and Gamma fields on one DofMap."""

    dofmap: DofMap
    velocity: np.ndarray
    pressure: np.ndarray
    multiplier: np.ndarray
    slip: np.ndarray

    def vertex_velocity(self) -> np.ndarray:
        nv = self.dofmap.n_vertices
        return np.column_stack([self.velocity[:nv], self.velocity[nv:2 * nv]])

    def tangential_velocity(self) -> np.ndarray:
        return self.dofmap.tangential_trace(self.velocity)


def interpolate(dofmap: DofMap, space: str, fn: Callable) -> np.ndarray:
    """Nodal interpolant of ``fn(x, y)`` in ``"velocity"``, ``"pressure"``
    or ``"multiplier"``.  Bubble coefficients are zero."""
    verts = dofmap.mesh.vertices
    if space == "velocity":
        vals = np.asarray(fn(verts[:, 0], verts[:, 1]), dtype=float)
        vals = np.broadcast_to(vals, (2, dofmap.n_vertices))
        out = np.zeros(dofmap.n_velocity)
        out[:dofmap.n_vertices] = vals[0]
        out[dofmap.n_vertices:2 * dofmap.n_vertices] = vals[1]
    elif space == "pressure":
        out = np.broadcast_to(np.asarray(fn(verts[:, 0], verts[:, 1]), dtype=float),
                              (dofmap.n_vertices,)).copy()
    elif space == "multiplier":
        p = verts[dofmap.gamma_vertices]
        out = np.broadcast_to(np.asarray(fn(p[:, 0], p[:, 1]), dtype=float),
                              (dofmap.n_multiplier,)).copy()
    else:
        raise ValueError(f"unknown space {space!r}")
    if not np.all(np.isfinite(out)):
        raise ValueError("interpolated function is not finite")
    return out


def p1_basis_gradients(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric gradients ``(nt, 3, 2)`` and triangle areas ``(nt,)``."""
    p = mesh.vertices[mesh.triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    if np.any(det <= 0):
        raise ValueError("degenerate or clockwise triangle")
    g1 = np.column_stack([d2[:, 1], -d2[:, 0]]) / det[:, None]
    g2 = np.column_stack([-d1[:, 1], d1[:, 0]]) / det[:, None]
    grads = np.stack([-g1 - g2, g1, g2], axis=1)
    return grads, 0.5 * det


def evaluate_velocity(dofmap: DofMap, u: np.ndarray, tri: np.ndarray, bary: np.ndarray):
    """Velocity and its gradient at points given by triangle and barycentrics.

    ``tri`` has shape ``(m,)`` and ``bary`` shape ``(m, 3)``.  Returns
    values ``(m, 2)`` and gradients ``(m, 2, 2)`` with ``grad[:, i, k] =
    d u_i / d x_k``.
    """
    grads, _ = p1_basis_gradients(dofmap.mesh)
    G = grads[tri]
    edofs = dofmap.element_velocity_dofs()[tri]
    coef = u[edofs]
    lam = bary
    b = BUBBLE_SCALE * lam[:, 0] * lam[:, 1] * lam[:, 2]
    db = BUBBLE_SCALE * (lam[:, 1:2] * lam[:, 2:3] * G[:, 0]
                         + lam[:, 0:1] * lam[:, 2:3] * G[:, 1]
                         + lam[:, 0:1] * lam[:, 1:2] * G[:, 2])
    vals = np.empty((len(tri), 2))
    grad = np.empty((len(tri), 2, 2))
    for c in range(2):
        cc = coef[:, 4 * c:4 * c + 4]
        vals[:, c] = np.einsum("mi,mi->m", cc[:, :3], lam) + cc[:, 3] * b
        grad[:, c] = np.einsum("mi,mik->mk", cc[:, :3], G) + cc[:, 3:4] * db
    return vals, grad


def evaluate_pressure(dofmap: DofMap, p: np.ndarray, tri: np.ndarray, bary: np.ndarray):
    return np.einsum("mi,mi->m", p[dofmap.mesh.triangles[tri]], bary)
