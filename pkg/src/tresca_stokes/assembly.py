"""Element and global assembly of the Stokes-Tresca forms.

Forms assembled here, for P1+bubble velocity and P1 pressure:

* strain form    a(u, v) = s * nu * int eps(u):eps(v)     (s = strain_factor)
* divergence     b(q, v) = -int q div v
* Gamma mass     m(u_t, v_t) = int_Gamma u_t v_t
* load           L(v) = int f . v

Element matrices for all triangles are computed in one vectorised pass.
Local velocity ordering is ``x1 x2 x3 xb y1 y2 y3 yb``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .linalg import SparseSystem
from .mesh import Mesh
from .spaces import BUBBLE_SCALE, DofMap, p1_basis_gradients


@dataclass(frozen=True)
class Quadrature:
    """Rule on the reference simplex; ``weights`` sum to its measure."""

    points: np.ndarray
    weights: np.ndarray
    degree: int


def triangle_rule() -> Quadrature:
    """7-point rule exact for degree 5 (Radon / Strang-Fix)."""
    s15 = np.sqrt(15.0)
    a1, a2 = (6.0 - s15) / 21.0, (6.0 + s15) / 21.0
    w1, w2 = (155.0 - s15) / 1200.0, (155.0 + s15) / 1200.0
    pts = [(1 / 3, 1 / 3, 1 / 3)]
    for a in (a1, a2):
        b = 1.0 - 2.0 * a
        pts += [(b, a, a), (a, b, a), (a, a, b)]
    w = np.array([9.0 / 40.0] + [w1] * 3 + [w2] * 3)
    return Quadrature(np.array(pts), 0.5 * w, 5)


def edge_rule() -> Quadrature:
    """3-point Gauss-Legendre on [0, 1], points as (1 - s, s)."""
    s = 0.5 + 0.5 * np.sqrt(0.6) * np.array([-1.0, 0.0, 1.0])
    return Quadrature(np.column_stack([1.0 - s, s]), np.array([5.0, 8.0, 5.0]) / 18.0, 5)


def _basis_at(grads: np.ndarray, bary: np.ndarray):
    """Scalar basis values (q, 4) and gradients (nt, q, 4, 2) at quadrature points."""
    lam = bary
    nq = len(lam)
    vals = np.empty((nq, 4))
    vals[:, :3] = lam
    vals[:, 3] = BUBBLE_SCALE * lam.prod(axis=1)
    nt = grads.shape[0]
    dphi = np.empty((nt, nq, 4, 2))
    dphi[:, :, :3, :] = grads[:, None, :, :]
    coef = BUBBLE_SCALE * np.column_stack([lam[:, 1] * lam[:, 2],
                                           lam[:, 0] * lam[:, 2],
                                           lam[:, 0] * lam[:, 1]])
    dphi[:, :, 3, :] = np.einsum("qa,tak->tqk", coef, grads)
    return vals, dphi


def _check_geometry(coords: np.ndarray) -> None:
    d1 = coords[:, 1] - coords[:, 0]
    d2 = coords[:, 2] - coords[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    if np.any(det <= 0):
        raise ValueError("degenerate or clockwise triangle")


class _Coords:
    """Minimal mesh stand-in so single triangles reuse the batched kernels."""

    def __init__(self, coords):
        coords = np.asarray(coords, dtype=float).reshape(-1, 3, 2)
        _check_geometry(coords)
        self.vertices = coords.reshape(-1, 2)
        self.triangles = np.arange(len(self.vertices)).reshape(-1, 3)


def stiffness_matrices(mesh, nu: float, strain_factor: float = 2.0) -> np.ndarray:
    """(nt, 8, 8) element matrices of ``strain_factor * nu * eps:eps``."""
    if not nu > 0:
        raise ValueError("viscosity must be positive")
    grads, area = p1_basis_gradients(mesh)
    q = triangle_rule()
    _, dphi = _basis_at(grads, q.points)
    wJ = 2.0 * area[:, None] * q.weights[None, :]
    # K[t, a, b, k, l] = int d_k phi_a d_l phi_b
    K = np.zeros((len(area), 4, 4, 2, 2))
    for iq in range(len(q.weights)):
        g = dphi[:, iq]
        K += wJ[:, iq, None, None, None, None] * g[:, :, None, :, None] * g[:, None, :, None, :]
    lap = K[..., 0, 0] + K[..., 1, 1]
    A = np.zeros((len(area), 8, 8))
    for i in range(2):
        for j in range(2):
            blk = K[..., j, i].copy()
            if i == j:
                blk += lap
            A[:, 4 * i:4 * i + 4, 4 * j:4 * j + 4] = blk
    return 0.5 * strain_factor * nu * A


def divergence_matrices(mesh) -> np.ndarray:
    """(nt, 3, 8) element matrices of ``-int q div v``."""
    grads, area = p1_basis_gradients(mesh)
    q = triangle_rule()
    vals, dphi = _basis_at(grads, q.points)
    wJ = 2.0 * area[:, None] * q.weights[None, :]
    B = np.empty((len(area), 3, 8))
    for i in range(2):
        B[:, :, 4 * i:4 * i + 4] = -np.einsum("tq,qa,tqb->tab", wJ, q.points, dphi[..., i])
    return B


def load_vectors(mesh, f: Callable) -> np.ndarray:
    """(nt, 8) element vectors of ``int f . v``."""
    _, area = p1_basis_gradients(mesh)
    q = triangle_rule()
    p = mesh.vertices[mesh.triangles]
    xq = np.einsum("qa,tak->tqk", q.points, p)
    fx, fy = (np.broadcast_to(np.asarray(c, dtype=float), xq.shape[:2])
              for c in f(xq[..., 0], xq[..., 1]))
    if not (np.all(np.isfinite(fx)) and np.all(np.isfinite(fy))):
        raise ValueError("load is not finite at a quadrature point")
    vals = np.column_stack([q.points, BUBBLE_SCALE * q.points.prod(axis=1)])
    wJ = 2.0 * area[:, None] * q.weights[None, :]
    F = np.empty((len(area), 8))
    F[:, :4] = np.einsum("tq,tq,qa->ta", wJ, fx, vals)
    F[:, 4:] = np.einsum("tq,tq,qa->ta", wJ, fy, vals)
    return F


def element_stiffness(triangle, nu: float, strain_factor: float = 2.0) -> np.ndarray:
    """8x8 strain-rate matrix of one triangle given as a (3, 2) array."""
    return stiffness_matrices(_Coords(triangle), nu, strain_factor)[0]


def element_divergence(triangle) -> np.ndarray:
    return divergence_matrices(_Coords(triangle))[0]


def edge_tangential_mass(edge) -> np.ndarray:
    """P1 mass matrix of a segment given by its two end points (or length)."""
    edge = np.asarray(edge, dtype=float)
    L = float(edge) if edge.ndim == 0 else float(np.linalg.norm(edge[1] - edge[0]))
    if not L > 0:
        raise ValueError("zero-length edge")
    return (L / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])


# ---------------------------------------------------------------- global

@dataclass(frozen=True, eq=False)
class GlobalOperators:
    """Unconstrained global matrices on the full velocity space."""

    A: sp.csr_matrix          # strain form
    B: sp.csr_matrix          # divergence, n_pressure x n_velocity
    mean: np.ndarray          # int phi_i for pressure basis functions
    F: np.ndarray             # volume load
    trace: sp.csr_matrix      # n_multiplier x n_velocity, rows give u_t
    gamma_mass: sp.csr_matrix  # n_multiplier x n_multiplier


@dataclass(frozen=True, eq=False)
class BubbleCondensation:
    """Element data needed to eliminate and recover the bubble dofs."""

    dofs: np.ndarray      # (nt, 2) global bubble dofs
    Ainv: np.ndarray      # (nt, 2, 2) inverse bubble stiffness
    B: np.ndarray         # (nt, 3, 2) pressure-bubble coupling
    F: np.ndarray         # (nt, 2) bubble load

    def recover(self, pressure_local: np.ndarray) -> np.ndarray:
        """Bubble coefficients (nt, 2) from element pressures (nt, 3)."""
        rhs = self.F - np.einsum("tab,ta->tb", self.B, pressure_local)
        return np.einsum("tij,tj->ti", self.Ainv, rhs)


def gamma_mass_matrix(dofmap: DofMap) -> sp.csr_matrix:
    """Consistent P1 mass on Gamma restricted to the multiplier dofs.

    Edge ends without a multiplier dof (Gamma0 corners) are dropped.
    """
    nm = dofmap.n_multiplier
    rows, cols, vals = [], [], []
    for (a, b), L in zip(dofmap.gamma_edges, dofmap.gamma_edge_lengths):
        Me = edge_tangential_mass(L)
        ends = (a, b)
        for i in range(2):
            for j in range(2):
                if ends[i] >= 0 and ends[j] >= 0:
                    rows.append(ends[i])
                    cols.append(ends[j])
                    vals.append(Me[i, j])
    return sp.coo_matrix((vals, (rows, cols)), shape=(nm, nm)).tocsr()


def trace_operator(dofmap: DofMap) -> sp.csr_matrix:
    nm = dofmap.n_multiplier
    return sp.csr_matrix((dofmap.gamma_signs, (np.arange(nm), dofmap.gamma_dofs)),
                         shape=(nm, dofmap.n_velocity))


def _scatter(Ae, rows, cols, shape) -> sp.csr_matrix:
    k, l = Ae.shape[1:]
    r = np.repeat(rows.astype(np.int32), l, axis=1).ravel()
    c = np.tile(cols.astype(np.int32), (1, k)).ravel()
    return sp.coo_matrix((Ae.ravel(), (r, c)), shape=shape).tocsr()


def _element_data(dofmap: DofMap, nu, f, strain_factor):
    mesh = dofmap.mesh
    Ae = stiffness_matrices(mesh, nu, strain_factor)
    Be = divergence_matrices(mesh)
    Fe = load_vectors(mesh, f) if f is not None else np.zeros((mesh.n_triangles, 8))
    return Ae, Be, Fe


def assemble_operators(dofmap: DofMap, nu: float, f: Callable | None = None,
                       strain_factor: float = 2.0, _elements=None,
                       _local=slice(None)) -> GlobalOperators:
    """Global operators; ``_local`` restricts which element velocity dofs are scattered."""
    mesh = dofmap.mesh
    nv, nvel = dofmap.n_vertices, dofmap.n_velocity
    edofs = dofmap.element_velocity_dofs()
    tri = mesh.triangles
    Ae, Be, Fe = _elements or _element_data(dofmap, nu, f, strain_factor)

    ed = edofs[:, _local]
    A = _scatter(Ae[:, _local][:, :, _local], ed, ed, (nvel, nvel))
    B = _scatter(Be[:, :, _local], tri, ed, (nv, nvel))
    _, area = p1_basis_gradients(mesh)
    mean = np.bincount(tri.ravel(), weights=np.repeat(area / 3.0, 3), minlength=nv)
    F = np.bincount(edofs.ravel(), weights=Fe.ravel(), minlength=nvel)
    return GlobalOperators(A, B, mean, F, trace_operator(dofmap), gamma_mass_matrix(dofmap))


def assemble_boundary_load(dofmap: DofMap, xi: np.ndarray, ops: GlobalOperators | None = None) -> np.ndarray:
    """Velocity-space vector of ``int_Gamma xi v_t`` for xi on multiplier dofs."""
    T = trace_operator(dofmap) if ops is None else ops.trace
    M = gamma_mass_matrix(dofmap) if ops is None else ops.gamma_mass
    return T.T @ (M @ np.asarray(xi, dtype=float))


_P1 = [0, 1, 2, 4, 5, 6]
_BUB = [3, 7]


def assemble_system(mesh: Mesh, dofmap: DofMap, nu: float, r: float = 0.0,
                    f: Callable | None = None, strain_factor: float = 2.0,
                    condense: bool = False) -> SparseSystem:
    """Saddle-point system with Dirichlet dofs eliminated.

    Unknowns are ``[free velocity | pressure | mean multiplier]``; the matrix is
    ``[[A + r T'MT, B', 0], [B, -C, m'], [0, m, 0]]`` where ``C`` is zero
    unless ``condense`` is set.  Condensing eliminates the bubbles element
    by element (they are orthogonal to P1 in the strain form and have no
    trace on Gamma), which cuts the system to P1 velocity plus pressure.
    """
    if dofmap.mesh is not mesh:
        raise ValueError("dofmap was built on a different mesh")
    if r < 0:
        raise ValueError("augmentation parameter must be non-negative")
    elements = _element_data(dofmap, nu, f, strain_factor)
    ops = assemble_operators(dofmap, nu, f, strain_factor, _elements=elements,
                             _local=_P1 if condense else slice(None))
    K = ops.A
    if r > 0 and dofmap.n_multiplier:
        K = (K + r * (ops.trace.T @ ops.gamma_mass @ ops.trace)).tocsr()
    if not condense:
        return SparseSystem.from_blocks(K, ops, dofmap)

    Ae, Be, Fe = elements
    Abb = Ae[:, _BUB][:, :, _BUB]
    det = Abb[:, 0, 0] * Abb[:, 1, 1] - Abb[:, 0, 1] * Abb[:, 1, 0]
    Ainv = np.empty_like(Abb)
    Ainv[:, 0, 0], Ainv[:, 1, 1] = Abb[:, 1, 1] / det, Abb[:, 0, 0] / det
    Ainv[:, 0, 1], Ainv[:, 1, 0] = -Abb[:, 0, 1] / det, -Abb[:, 1, 0] / det
    Bb = Be[:, :, _BUB]
    cond = BubbleCondensation(dofmap.element_velocity_dofs()[:, _BUB], Ainv, Bb, Fe[:, _BUB])
    tri = mesh.triangles
    C = _scatter(np.einsum("tai,tij,tbj->tab", Bb, Ainv, Bb), tri, tri, (dofmap.n_pressure,) * 2)
    BAF = np.einsum("tai,tij,tj->ta", Bb, Ainv, cond.F)
    g = np.bincount(tri.ravel(), weights=BAF.ravel(), minlength=dofmap.n_pressure)
    return SparseSystem.from_blocks(K, ops, dofmap, condensation=cond, C=C, pressure_shift=g)
