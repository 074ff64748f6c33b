"""Augmented-Lagrangian Uzawa iteration (ALG2) for Tresca slip on Gamma.

Each sweep solves a Stokes problem with a Robin-like term ``r (u_t, v_t)``
on Gamma, projects ``lambda + r u_t`` onto the slip set, and takes an ascent
step in the multiplier.  The system matrix never changes, so it is
factorised once.

Sign convention: ``lambda`` enters the momentum balance as ``+<lambda, v_t>``,
hence it equals minus the tangential stress, ``sigma_t = -lambda``.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .assembly import assemble_system
from .linalg import factorize
from .mesh import Mesh
from .spaces import DofMap, FieldSolution

log = logging.getLogger(__name__)


@dataclass
class TrescaConfig:
    nu: float = 0.1
    g: float | Callable = 0.0
    r: float = 10.0
    rho: float | None = None
    tol: float = 1e-6
    max_iters: int = 1000
    strain_factor: float = 2.0
    condense: bool = True

    def __post_init__(self):
        if self.rho is None:
            self.rho = self.r
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not self.r > 0 or not self.rho > 0:
            raise ValueError("r and rho must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.strain_factor not in (1, 2):
            raise ValueError("strain_factor must be 1 or 2")
        if not callable(self.g) and not self.g >= 0:
            raise ValueError("slip threshold g must be non-negative")

    def threshold(self, dofmap: DofMap) -> np.ndarray:
        """Threshold at the multiplier dofs."""
        n = dofmap.n_multiplier
        if callable(self.g):
            p = dofmap.mesh.vertices[dofmap.gamma_vertices]
            g = np.broadcast_to(np.asarray(self.g(p[:, 0], p[:, 1]), dtype=float), (n,)).copy()
        else:
            g = np.full(n, float(self.g))
        if np.any(~np.isfinite(g)) or np.any(g < 0):
            raise ValueError("slip threshold g must be finite and non-negative")
        return g


@dataclass
class TrescaState:
    k: int
    velocity: np.ndarray
    pressure: np.ndarray
    slip: np.ndarray
    multiplier: np.ndarray
    history: list = field(default_factory=list)
    converged: bool = False


@dataclass
class Alg2Result:
    solution: FieldSolution
    iterations: int
    converged: bool
    history: list

    def __iter__(self):
        return iter((self.solution, self.iterations))


def slip_projection(xi, g, r):
    """Slip velocity from ``xi = lambda + r u_t``; zero while ``|xi| <= g``."""
    xi = np.asarray(xi, dtype=float)
    a = np.abs(xi)
    return np.where(a >= g, np.sign(xi) * np.maximum(a - g, 0.0) / r, 0.0)


def multiplier_update(lam, u_t, phi, rho):
    return np.asarray(lam) + rho * (np.asarray(u_t) - np.asarray(phi))


def stopping_metric(current, previous) -> float:
    """``|(u, phi) - (u_prev, phi_prev)| / |(u, phi)|`` in the Euclidean norm."""
    cur = np.concatenate([np.ravel(c) for c in current])
    prev = np.concatenate([np.ravel(c) for c in previous])
    num = np.linalg.norm(cur - prev)
    den = np.linalg.norm(cur)
    if den == 0:
        return 0.0 if num == 0 else np.inf
    return float(num / den)


def complementarity_residual(lam, u_t, g) -> np.ndarray:
    """Pointwise ``sigma_t u_t + g |u_t|`` with ``sigma_t = -lambda``."""
    return -np.asarray(lam) * u_t + g * np.abs(u_t)


def stokes_solve(mesh: Mesh, dofmap: DofMap, nu: float, f: Callable | None = None,
                 strain_factor: float = 2.0, condense: bool = True) -> FieldSolution:
    """Single Stokes solve with Gamma treated as impermeable and stress free."""
    system = assemble_system(mesh, dofmap, nu, 0.0, f, strain_factor, condense)
    x = factorize(system).solve(system.rhs)
    u, p, _ = system.split(x)
    nm = dofmap.n_multiplier
    return FieldSolution(dofmap, u, p, np.zeros(nm), dofmap.tangential_trace(u))


def alg2_solve(mesh: Mesh, dofmap: DofMap, config: TrescaConfig,
               f: Callable | None = None, trace_csv=None) -> Alg2Result:
    """Run ALG2 from ``phi = 0``, ``lambda = 0`` until the relative change
    of ``(u, phi)`` drops below ``config.tol``.

    ``trace_csv`` (a path) receives one row per sweep.  Running out of
    iterations returns the last iterate with ``converged = False``.
    """
    nm = dofmap.n_multiplier
    cfg = config
    if nm == 0:
        sol = stokes_solve(mesh, dofmap, cfg.nu, f, cfg.strain_factor, cfg.condense)
        return Alg2Result(sol, 1, True, [])

    g = cfg.threshold(dofmap)
    r, rho = cfg.r, cfg.rho
    system = assemble_system(mesh, dofmap, cfg.nu, r, f, cfg.strain_factor, cfg.condense)
    fact = factorize(system)

    state = TrescaState(0, None, None, np.zeros(nm), np.zeros(nm))
    u_prev = phi_prev = None
    for k in range(cfg.max_iters):
        x = fact.solve(system.rhs + system.gamma_rhs(r * state.slip - state.multiplier))
        u, p, _ = system.split(x)
        u_t = dofmap.tangential_trace(u)
        phi = slip_projection(state.multiplier + r * u_t, g, r)
        lam = multiplier_update(state.multiplier, u_t, phi, rho)

        change = np.inf if u_prev is None else stopping_metric((u, phi), (u_prev, phi_prev))
        state.history.append((k, change, float(np.max(np.abs(u_t - phi))),
                              float(np.max(np.abs(complementarity_residual(lam, u_t, g))))))
        state.k, state.velocity, state.pressure = k, u, p
        state.slip, state.multiplier = phi, lam
        u_prev, phi_prev = u, phi
        if change < cfg.tol:
            state.converged = True
            break
    else:
        log.warning("ALG2 stopped after %d sweeps, last change %.3e", cfg.max_iters, change)

    if trace_csv is not None:
        with open(trace_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "relative_change", "max_slip_gap", "complementarity"])
            w.writerows(state.history)

    sol = FieldSolution(dofmap, state.velocity, state.pressure, state.multiplier, state.slip)
    return Alg2Result(sol, state.k + 1, state.converged, state.history)
