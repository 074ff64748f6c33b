"""Manufactured solutions, error norms and convergence studies."""
from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import sympy

from .assembly import edge_rule, triangle_rule
from .mesh import GAMMA, GAMMA0, BoundarySpec, Mesh, structured_rect_mesh, tag_boundary
from .spaces import (DofMap, FieldSolution, build_dofmap, evaluate_pressure,
                     evaluate_velocity, p1_basis_gradients)
from .tresca import TrescaConfig, alg2_solve

log = logging.getLogger(__name__)

CSV_COLUMNS = ["h", "e0", "e1", "ep", "alpha0", "alpha1", "alphap", "iters", "seconds"]


@dataclass
class ManufacturedCase:
    """Problem data on ``[0, Lx] x [0, Ly]``.

    ``velocity``/``velocity_grad``/``pressure`` are None when no exact
    solution is known (errors are then taken against a reference solve).
    """

    name: str
    spec: BoundarySpec
    Lx: float = 0.1
    Ly: float = 0.1
    nu: float = 0.1
    g: float | Callable = 0.0
    tol: float = 1e-6
    strain_factor: float = 2.0
    forcing: Callable | None = None
    dirichlet: Callable | None = None
    velocity: Callable | None = None
    velocity_grad: Callable | None = None
    pressure: Callable | None = None

    @property
    def has_exact(self) -> bool:
        return self.velocity is not None

    def config(self, **overrides) -> TrescaConfig:
        kw = dict(nu=self.nu, g=self.g, tol=self.tol, strain_factor=self.strain_factor)
        kw.update(overrides)
        return TrescaConfig(**kw)

    def mesh(self, n: int) -> Mesh:
        return tag_boundary(structured_rect_mesh(n, n, self.Lx, self.Ly), self.spec)

    def dofmap(self, mesh: Mesh) -> DofMap:
        return build_dofmap(mesh, self.dirichlet)


def _vectorize(expr, x, y):
    fn = sympy.lambdify((x, y), expr, "numpy")

    def call(X, Y):
        X = np.asarray(X, dtype=float)
        return np.broadcast_to(fn(X, Y), np.broadcast(X, Y).shape).astype(float)
    return call


def _manufactured(u1, u2, p, x, y, nu, strain_factor):
    """Numeric callables for u, grad u, p and f = -div(s nu eps(u)) + grad p."""
    s = sympy.Rational(int(strain_factor))
    eps = sympy.Matrix([[sympy.diff(u1, x), (sympy.diff(u1, y) + sympy.diff(u2, x)) / 2],
                        [(sympy.diff(u1, y) + sympy.diff(u2, x)) / 2, sympy.diff(u2, y)]])
    sigma = s * nu * eps
    f1 = -(sympy.diff(sigma[0, 0], x) + sympy.diff(sigma[0, 1], y)) + sympy.diff(p, x)
    f2 = -(sympy.diff(sigma[1, 0], x) + sympy.diff(sigma[1, 1], y)) + sympy.diff(p, y)
    U = [_vectorize(e, x, y) for e in (u1, u2)]
    G = [[_vectorize(sympy.diff(c, v), x, y) for v in (x, y)] for c in (u1, u2)]
    P = _vectorize(p, x, y)
    Fs = [_vectorize(sympy.simplify(e), x, y) for e in (f1, f2)]

    def velocity(X, Y):
        return np.array([U[0](X, Y), U[1](X, Y)])

    def velocity_grad(X, Y):
        return np.array([[G[i][k](X, Y) for k in range(2)] for i in range(2)])

    def forcing(X, Y):
        return np.array([Fs[0](X, Y), Fs[1](X, Y)])
    return velocity, velocity_grad, P, forcing


def test1_case(nu: float = 0.1, g: float = 40.0, strain_factor: float = 2.0,
               spec: BoundarySpec | None = None, printed: bool = False) -> ManufacturedCase:
    """Smooth manufactured flow on [0, 0.1]^2 with one period per direction.

    The velocity is the curl of ``(1 - cos ax)(1 - cos ay)/a`` with
    ``a = 20 pi``: divergence free and zero on the whole boundary, so the
    friction threshold only matters if the tangential stress reaches ``g``.
    ``printed=True`` swaps in ``u2 = -sin(ax)cos(ay) - sin(ay)``, which is
    neither solenoidal nor zero on the boundary; kept for comparison only.
    """
    x, y = sympy.symbols("x y", real=True)
    a = 20 * sympy.pi
    u1 = -sympy.cos(a * x) * sympy.sin(a * y) + sympy.sin(a * y)
    if printed:
        u2 = -sympy.sin(a * x) * sympy.cos(a * y) - sympy.sin(a * y)
    else:
        u2 = sympy.sin(a * x) * sympy.cos(a * y) - sympy.sin(a * x)
    p = a * (sympy.cos(a * y) - sympy.cos(a * x))
    vel, grad, pres, force = _manufactured(u1, u2, p, x, y, sympy.nsimplify(nu), strain_factor)
    return ManufacturedCase("test1", spec or BoundarySpec.channel(), nu=nu, g=g,
                            strain_factor=strain_factor, forcing=force,
                            velocity=vel, velocity_grad=grad, pressure=pres)


def noslip_case(nu: float = 0.1, strain_factor: float = 2.0) -> ManufacturedCase:
    """Test-1 data with every side no-slip (plain Stokes)."""
    case = test1_case(nu=nu, strain_factor=strain_factor,
                      spec=BoundarySpec(GAMMA0, GAMMA0, GAMMA0, GAMMA0))
    return replace(case, name="noslip")


def inflow_profile(x, y):
    """``(y(1-y), -y(1-y))`` imposed on the left and right walls."""
    q = np.asarray(y, dtype=float) * (1.0 - np.asarray(y, dtype=float))
    q = np.broadcast_to(q, np.broadcast(x, y).shape)
    return np.array([q, -q])


def test2_case(g: float = 0.015, nu: float = 0.1, strain_factor: float = 2.0) -> ManufacturedCase:
    """Channel with prescribed side profiles and friction on top/bottom; no exact solution."""
    return ManufacturedCase("test2", BoundarySpec.channel(), nu=nu, g=g,
                            strain_factor=strain_factor, dirichlet=inflow_profile)


CASES = {"test1": test1_case, "test2": test2_case, "noslip": noslip_case}


# ---------------------------------------------------------------- errors

def _quadrature_points(mesh: Mesh):
    q = triangle_rule()
    _, area = p1_basis_gradients(mesh)
    nt, nq = mesh.n_triangles, len(q.weights)
    tri = np.repeat(np.arange(nt), nq)
    bary = np.tile(q.points, (nt, 1))
    pts = np.einsum("ma,mak->mk", bary, mesh.vertices[mesh.triangles[tri]])
    w = (2.0 * area[:, None] * q.weights[None, :]).ravel()
    return tri, bary, pts, w


def barycentric(mesh: Mesh, tri: np.ndarray, pts: np.ndarray) -> np.ndarray:
    grads, _ = p1_basis_gradients(mesh)
    x0 = mesh.vertices[mesh.triangles[tri, 0]]
    d = pts - x0
    lam = np.einsum("mak,mk->ma", grads[tri], d)
    lam[:, 0] += 1.0
    return lam


def _is_nested(coarse: Mesh, fine: Mesh) -> bool:
    return (fine.nx % coarse.nx == 0 and fine.ny % coarse.ny == 0
            and np.isclose(fine.Lx, coarse.Lx) and np.isclose(fine.Ly, coarse.Ly)
            and fine.nx // coarse.nx == fine.ny // coarse.ny)


def error_norms(solution: FieldSolution, exact) -> tuple[float, float, float]:
    """(L2 velocity, H1 velocity, L2 pressure) errors.

    ``exact`` is a ManufacturedCase with an exact solution, or a
    FieldSolution on a nested refinement of the same rectangle.  In the
    latter case the integrals run over the fine mesh, on which both fields
    are polynomial per triangle.
    """
    mesh = solution.dofmap.mesh
    if isinstance(exact, FieldSolution):
        fine = exact.dofmap.mesh
        if not _is_nested(mesh, fine):
            raise ValueError("reference mesh is not a nested refinement")
        tri_f, bary_f, pts, w = _quadrature_points(fine)
        ue, ge = evaluate_velocity(exact.dofmap, exact.velocity, tri_f, bary_f)
        pe = evaluate_pressure(exact.dofmap, exact.pressure, tri_f, bary_f)
        tri = mesh.locate(pts)
        bary = barycentric(mesh, tri, pts)
    else:
        if not exact.has_exact:
            raise ValueError(f"case {exact.name!r} has no exact solution")
        tri, bary, pts, w = _quadrature_points(mesh)
        ue = exact.velocity(pts[:, 0], pts[:, 1]).T
        ge = np.moveaxis(exact.velocity_grad(pts[:, 0], pts[:, 1]), -1, 0)
        pe = exact.pressure(pts[:, 0], pts[:, 1])
    uh, gh = evaluate_velocity(solution.dofmap, solution.velocity, tri, bary)
    ph = evaluate_pressure(solution.dofmap, solution.pressure, tri, bary)
    e0 = float(np.sqrt(np.sum(w * np.sum((uh - ue) ** 2, axis=1))))
    semi = float(np.sum(w * np.sum((gh - ge) ** 2, axis=(1, 2))))
    ep = float(np.sqrt(np.sum(w * (ph - pe) ** 2)))
    return e0, float(np.sqrt(e0 ** 2 + semi)), ep


def _gamma_profile(dofmap: DofMap, values: np.ndarray, side: str, coord: np.ndarray) -> np.ndarray:
    """P1 Gamma field along one side, zero where no multiplier dof exists."""
    mesh = dofmap.mesh
    verts = mesh.side_vertices(side)
    full = np.zeros(mesh.n_vertices)
    full[dofmap.gamma_vertices] = values
    c = 0 if side in ("bottom", "top") else 1
    return np.interp(coord, mesh.vertices[verts, c], full[verts])


def multiplier_surrogate(solution: FieldSolution, reference: FieldSolution) -> float:
    """``h^(1/2) |lambda_h - lambda_ref|_(0,Gamma)``; a diagnostic stand-in for the dual norm."""
    mesh = solution.dofmap.mesh
    fine = reference.dofmap.mesh
    q = edge_rule()
    total = 0.0
    for side in ("bottom", "right", "top", "left"):
        if mesh.spec.label(side) != GAMMA:
            continue
        L = fine.Lx if side in ("bottom", "top") else fine.Ly
        n = fine.nx if side in ("bottom", "top") else fine.ny
        knots = np.linspace(0.0, L, n + 1)
        s = (knots[:-1, None] + np.diff(knots)[:, None] * q.points[None, :, 1]).ravel()
        w = (np.diff(knots)[:, None] * q.weights[None, :]).ravel()
        d = (_gamma_profile(solution.dofmap, solution.multiplier, side, s)
             - _gamma_profile(reference.dofmap, reference.multiplier, side, s))
        total += float(np.sum(w * d ** 2))
    return float(np.sqrt(mesh.h * total))


def eoc(errors, hs) -> list[float]:
    """Pairwise rates ``log(e1/e2)/log(h1/h2)``; NaN where an error is not positive."""
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if len(errors) != len(hs) or len(hs) < 2:
        raise ValueError("need matching error and h lists of length >= 2")
    if np.any(np.diff(hs) >= 0):
        raise ValueError("mesh sizes must be strictly decreasing")
    rates = []
    for i in range(1, len(hs)):
        e1, e2 = errors[i - 1], errors[i]
        if e1 <= 0 or e2 <= 0:
            rates.append(float("nan"))
        else:
            rates.append(float(np.log(e1 / e2) / np.log(hs[i - 1] / hs[i])))
    return rates


# ---------------------------------------------------------------- studies

@dataclass
class StudyRow:
    n: int
    h: float
    e0: float
    e1: float
    ep: float
    iters: int
    converged: bool
    seconds: float
    alpha0: float = float("nan")
    alpha1: float = float("nan")
    alphap: float = float("nan")
    multiplier_error: float = float("nan")


@dataclass
class StudyReport:
    case: str
    rows: list[StudyRow] = field(default_factory=list)
    reference_n: int | None = None

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.rows)

    def fill_rates(self) -> None:
        rows = sorted(self.rows, key=lambda r: -r.h)
        self.rows = rows
        if len(rows) < 2:
            return
        hs = [r.h for r in rows]
        for name in ("e0", "e1", "ep"):
            rates = eoc([getattr(r, name) for r in rows], hs)
            alpha = {"e0": "alpha0", "e1": "alpha1", "ep": "alphap"}[name]
            for r, a in zip(rows[1:], rates):
                setattr(r, alpha, a)

    def to_csv(self, path=None, timings: bool = True) -> str:
        """CSV text (and file if ``path``); ``timings=False`` drops wall time."""
        cols = CSV_COLUMNS if timings else CSV_COLUMNS[:-1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            rec = [f"{r.h:.10e}", f"{r.e0:.10e}", f"{r.e1:.10e}", f"{r.ep:.10e}",
                   _fmt_rate(r.alpha0), _fmt_rate(r.alpha1), _fmt_rate(r.alphap),
                   str(r.iters) + ("" if r.converged else "*")]
            if timings:
                rec.append(f"{r.seconds:.3f}")
            w.writerow(rec)
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _fmt_rate(a: float) -> str:
    return "" if np.isnan(a) else f"{a:.6f}"


def solve_case(case: ManufacturedCase, n: int, config: TrescaConfig | None = None):
    mesh = case.mesh(n)
    dofmap = case.dofmap(mesh)
    return alg2_solve(mesh, dofmap, config or case.config(), case.forcing)


def run_study(case: ManufacturedCase, ns, config: TrescaConfig | None = None,
              ref_n: int | None = None, csv_path=None, timings: bool = True) -> StudyReport:
    """Solve ``case`` on each ``n x n`` mesh and tabulate errors and rates.

    Without an exact solution the errors are measured against a solve on
    the ``ref_n`` mesh, which every study mesh must divide.
    """
    config = config or case.config()
    reference = None
    if not case.has_exact:
        if ref_n is None:
            raise ValueError(f"case {case.name!r} needs a reference mesh size")
        bad = [n for n in ns if ref_n % n]
        if bad:
            raise ValueError(f"meshes {bad} are not nested in n={ref_n}")
        t0 = time.perf_counter()
        res = solve_case(case, ref_n, config)
        log.info("reference n=%d: %d sweeps, %.1fs", ref_n, res.iterations, time.perf_counter() - t0)
        if not res.converged:
            log.warning("reference solve did not converge")
        reference = res.solution

    report = StudyReport(case.name, reference_n=ref_n if reference is not None else None)
    for n in sorted(ns):
        t0 = time.perf_counter()
        res = solve_case(case, n, config)
        seconds = time.perf_counter() - t0
        target = reference if reference is not None else case
        e0, e1, ep = error_norms(res.solution, target)
        row = StudyRow(n, res.solution.dofmap.mesh.h, e0, e1, ep, res.iterations,
                       res.converged, seconds)
        if reference is not None and res.solution.dofmap.n_multiplier:
            row.multiplier_error = multiplier_surrogate(res.solution, reference)
        log.info("n=%d h=%.4e e1=%.4e iters=%d", n, row.h, e1, res.iterations)
        report.rows.append(row)
    report.fill_rates()
    if csv_path is not None:
        report.to_csv(csv_path, timings=timings)
    return report

# keep pytest from collecting the case factories when imported into tests
test1_case.__test__ = False
test2_case.__test__ = False
