"""Sparse saddle-point systems and their direct factorisation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SingularSystemError(RuntimeError):
    """The factorisation met an exactly singular pivot."""


@dataclass(eq=False)
class SparseSystem:
    """Symmetric indefinite system ``matrix @ x = rhs``.

    Unknowns are ordered ``[velocity | pressure | mean multiplier]``.  The
    velocity block holds the unconstrained dofs listed in ``velocity_dofs``;
    when bubbles are condensed, ``condensation`` recovers them after a solve.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    velocity_dofs: np.ndarray
    n_pressure: int
    dofmap: object = None
    ops: object = None
    lift: np.ndarray | None = None
    condensation: object = None
    _trace_free: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_free(self) -> int:
        return len(self.velocity_dofs)

    @classmethod
    def from_blocks(cls, K, ops, dofmap, condensation=None, C=None,
                    pressure_shift=None) -> "SparseSystem":
        free, fixed = dofmap.free_dofs, dofmap.fixed_dofs
        if condensation is not None:
            free = np.setdiff1d(free, condensation.dofs.ravel())
        g = dofmap.fixed_values
        lift = np.zeros(dofmap.n_velocity)
        lift[fixed] = g
        npr = ops.B.shape[0]

        Kfr = K[free]
        Bf = ops.B[:, free]
        m = sp.csr_matrix(ops.mean[None, :])
        matrix = sp.bmat([[Kfr[:, free], Bf.T, None],
                          [Bf, None if C is None else -C, m.T],
                          [None, m, None]], format="csr")
        rhs_p = -(ops.B[:, fixed] @ g)
        if pressure_shift is not None:
            rhs_p = rhs_p - pressure_shift
        rhs = np.concatenate([ops.F[free] - Kfr[:, fixed] @ g, rhs_p, [0.0]])
        sys = cls(matrix, rhs, free, npr, dofmap, ops, lift, condensation)
        sys._trace_free = ops.trace[:, free].tocsr()
        return sys

    def split(self, x: np.ndarray):
        """Full velocity, pressure and mean multiplier from a solution vector."""
        u = self.lift.copy()
        u[self.velocity_dofs] = x[:self.n_free]
        p = x[self.n_free:self.n_free + self.n_pressure]
        if self.condensation is not None:
            pl = p[self.dofmap.mesh.triangles]
            u[self.condensation.dofs] = self.condensation.recover(pl)
        return u, p, x[self.n_free + self.n_pressure:]

    def gamma_rhs(self, xi: np.ndarray) -> np.ndarray:
        """Right-hand side increment for a Gamma load ``int xi v_t``."""
        out = np.zeros(self.size)
        out[:self.n_free] = self._trace_free.T @ (self.ops.gamma_mass @ xi)
        return out


class Factorization:
    """Sparse LU of a (symmetric indefinite) matrix, reusable across solves."""

    def __init__(self, matrix, permc_spec: str = "COLAMD"):
        A = sp.csc_matrix(matrix)
        if A.shape[0] != A.shape[1]:
            raise ValueError("matrix is not square")
        self.shape = A.shape
        self._A = A
        try:
            self._lu = spla.splu(A, permc_spec=permc_spec)
        except RuntimeError as exc:
            raise SingularSystemError(str(exc)) from exc

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.shape[0]:
            raise ValueError(f"rhs has length {rhs.shape[0]}, expected {self.shape[0]}")
        x = self._lu.solve(rhs)
        if not np.all(np.isfinite(x)):
            raise SingularSystemError("solution is not finite")
        return x

    def residual(self, x: np.ndarray, rhs: np.ndarray) -> float:
        """Relative residual ``|Ax - b| / |b|`` (absolute when b = 0)."""
        r = np.linalg.norm(self._A @ x - rhs)
        nb = np.linalg.norm(rhs)
        return float(r / nb) if nb > 0 else float(r)


def nested_dissection_order(nx: int, ny: int, leaf: int = 8) -> np.ndarray:
    """Vertex elimination order for an ``(nx+1) x (ny+1)`` structured grid.

    Grid lines are used as separators; valid for stencils coupling only
    vertices at index distance one (the 7-point triangle stencil).
    """
    out = []

    def rec(i0, i1, j0, j1):
        if (i1 - i0) * (j1 - j0) <= leaf * leaf:
            I, J = np.meshgrid(np.arange(i0, i1), np.arange(j0, j1))
            out.append((J * (nx + 1) + I).ravel())
        elif i1 - i0 >= j1 - j0:
            m = (i0 + i1) // 2
            rec(i0, m, j0, j1)
            rec(m + 1, i1, j0, j1)
            out.append(np.arange(j0, j1) * (nx + 1) + m)
        else:
            m = (j0 + j1) // 2
            rec(i0, i1, j0, m)
            rec(i0, i1, m + 1, j1)
            out.append(m * (nx + 1) + np.arange(i0, i1))

    rec(0, nx + 1, 0, ny + 1)
    return np.concatenate(out)


class QuasiDefiniteFactorization(Factorization):
    """Factorisation of a bubble-condensed Stokes system.

    The leading block ``[[A, B'], [B, -C]]`` is quasi-definite except for the
    constant-pressure mode, so a shift ``-kappa e e'`` on one pressure dof
    makes it factorisable without pivoting in a nested-dissection order.
    The shift and the zero-mean border are then removed exactly by a 2x2
    correction per solve.
    """

    def __init__(self, system: SparseSystem, refine: int = 2):
        mesh = system.dofmap.mesh
        nv = mesh.n_vertices
        n = system.n_free + system.n_pressure
        A = sp.csc_matrix(system.matrix)
        self.shape = A.shape
        self._A = A
        self._n = n
        self._refine = refine
        K0 = A[:n, :n]
        self._M = A[:n, n].toarray().ravel()
        self._e = n - 1
        self._kappa = float(np.abs(K0.diagonal()).max())
        shift = sp.csc_matrix(([self._kappa], ([self._e], [self._e])), shape=K0.shape)
        K1 = (K0 - shift).tocsr()

        vertex = np.concatenate([system.velocity_dofs % nv, np.arange(system.n_pressure)])
        kind = np.concatenate([system.velocity_dofs // nv, np.full(system.n_pressure, 2)])
        rank = np.empty(nv, dtype=np.int64)
        rank[nested_dissection_order(mesh.nx, mesh.ny)] = np.arange(nv)
        self._perm = np.lexsort((kind, rank[vertex]))
        P = K1[self._perm][:, self._perm].tocsc()
        del K1
        try:
            self._lu = spla.splu(P, permc_spec="NATURAL", diag_pivot_thresh=0.0,
                                 options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise SingularSystemError(str(exc)) from exc
        del P
        ee = np.zeros(n)
        ee[self._e] = 1.0
        self._zM = self._solve1(self._M)
        self._ze = self._solve1(ee)
        self._eM = self._zM[self._e]
        self._ee = self._ze[self._e]
        self._MM = self._M @ self._zM
        self._Me = self._M @ self._ze

    def _solve1(self, b):
        x = np.empty_like(b)
        x[self._perm] = self._lu.solve(b[self._perm])
        return x

    def _solve_once(self, rhs):
        n, k = self._n, self._kappa
        zb = self._solve1(rhs[:n])
        G = np.array([[1.0 + k * self._ee, self._eM],
                      [k * self._Me, self._MM]])
        s, mu = np.linalg.solve(G, [zb[self._e], self._M @ zb - rhs[n]])
        x = np.empty(self.shape[0])
        x[:n] = zb - mu * self._zM - k * s * self._ze
        x[n] = mu
        return x

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.shape[0]:
            raise ValueError(f"rhs has length {rhs.shape[0]}, expected {self.shape[0]}")
        x = self._solve_once(rhs)
        nb = np.linalg.norm(rhs)
        for _ in range(self._refine):
            r = rhs - self._A @ x
            if nb == 0 or np.linalg.norm(r) <= 1e-13 * nb:
                break
            x += self._solve_once(r)
        if not np.all(np.isfinite(x)):
            raise SingularSystemError("solution is not finite")
        return x


def factorize(system) -> Factorization:
    """Factorise a system or matrix; condensed structured systems use nested dissection."""
    if isinstance(system, SparseSystem):
        if system.condensation is not None and hasattr(system.dofmap.mesh, "nx"):
            return QuasiDefiniteFactorization(system)
        return Factorization(system.matrix)
    return Factorization(system)


def solve(factorization: Factorization, rhs: np.ndarray) -> np.ndarray:
    return factorization.solve(rhs)
