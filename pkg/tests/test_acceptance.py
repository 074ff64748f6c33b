"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run standalone with ``python3 tests/test_acceptance.py``; under pytest the
lines are also collected into the terminal summary.
"""
import time

import numpy as np
import pytest

import oracles
from acceptance_log import record
from tresca_stokes.assembly import (assemble_operators, assemble_system, edge_tangential_mass,
                                    element_divergence, element_stiffness)
from tresca_stokes.harness import (_quadrature_points, error_norms, noslip_case,
                                   run_study, solve_case, test1_case, test2_case)
from tresca_stokes.linalg import factorize
from tresca_stokes.spaces import evaluate_pressure
from tresca_stokes.tresca import complementarity_residual, slip_projection

STUDY_NS = [16, 32, 64, 128]


def _rel(a, b):
    return float(np.abs(a - b).max() / np.abs(b).max())


def test_criterion_1_element_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    worst = {"A": 0.0, "B": 0.0, "M": 0.0}
    for tri in oracles.random_triangles(rng, 100):
        nu = rng.uniform(0.01, 10.0)
        worst["A"] = max(worst["A"], _rel(element_stiffness(tri, nu), oracles.stiffness(tri, nu)))
        worst["B"] = max(worst["B"], _rel(element_divergence(tri), oracles.divergence(tri)))
        p0, p1 = rng.uniform(-5, 5, (2, 2))
        worst["M"] = max(worst["M"], _rel(edge_tangential_mass([p0, p1]), oracles.edge_mass(p0, p1)))
    dt = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-10 and dt < 5
    detail = ", ".join(f"{k}_e rel err {v:.1e}" for k, v in worst.items())
    assert record(1, ok, f"{detail} (tol 1e-10); {dt:.2f}s (< 5s)")


def test_criterion_2_saddle_solve():
    t0 = time.perf_counter()
    case = test1_case()
    mesh = case.mesh(64)
    dofmap = case.dofmap(mesh)
    cfg = case.config()
    system = assemble_system(mesh, dofmap, cfg.nu, cfg.r, case.forcing, cfg.strain_factor,
                             condense=cfg.condense)
    fact = factorize(system)
    x = fact.solve(system.rhs)
    res = fact.residual(x, system.rhs)
    u, p, _ = system.split(x)
    # the condensed system stores only P1 columns of B; measure with the full operator
    B = assemble_operators(dofmap, cfg.nu).B
    div = float(np.linalg.norm(B @ u) / np.linalg.norm(u))
    tri, bary, _, w = _quadrature_points(mesh)
    ph = evaluate_pressure(dofmap, p, tri, bary)
    area = mesh.area
    mean = abs(float(np.sum(w * ph))) / area
    pnorm = float(np.sqrt(np.sum(w * ph ** 2)))
    dt = time.perf_counter() - t0
    ok = res < 1e-10 and div < 1e-9 and mean < 1e-10 * area * pnorm and dt < 10
    assert record(2, ok, f"residual {res:.1e} (< 1e-10), |Bu|/|u| {div:.1e} (< 1e-9), "
                         f"|mean p| {mean:.1e} (< {1e-10 * area * pnorm:.1e}); {dt:.2f}s (< 10s)")


_STUDY = {}


def _smooth_study():
    case = noslip_case()
    return run_study(case, STUDY_NS, case.config())


def test_criterion_3_smooth_rates():
    t0 = time.perf_counter()
    rep = _smooth_study()
    dt = time.perf_counter() - t0
    _STUDY["csv"] = rep.to_csv(timings=False)
    last = rep.rows[-1]
    ok = (0.85 <= last.alpha1 <= 1.15 and 1.7 <= last.alpha0 <= 2.2 and last.alphap >= 0.9
          and rep.all_converged and dt < 180)
    assert record(3, ok, f"final-pair EOC H1 {last.alpha1:.3f} [0.85,1.15], "
                         f"L2 {last.alpha0:.3f} [1.7,2.2], p {last.alphap:.3f} (>= 0.9); "
                         f"{dt:.1f}s (< 180s)")


def test_criterion_4_tresca_rate():
    t0 = time.perf_counter()
    case = test2_case()
    rep = run_study(case, STUDY_NS, case.config(), ref_n=512)
    dt = time.perf_counter() - t0
    rates = [r.alpha1 for r in rep.rows[1:]]
    last = rates[-1]
    ok = 0.65 <= last <= 0.90 and rep.all_converged and dt < 900
    assert record(4, ok, f"H1 EOC vs n=512 reference {', '.join(f'{a:.3f}' for a in rates)}; "
                         f"final pair {last:.3f} [0.65,0.90]; {dt:.1f}s (< 900s)")


def test_criterion_5_threshold_sensitivity():
    n = 32
    # the friction functional is built on a(u, v) = int nu eps(u):eps(v)
    case = test1_case(strain_factor=1)
    errs, iters = {}, {}
    for g in (0.0, 0.015, 10.0, 40.0):
        res = solve_case(case, n, case.config(g=g, r=10.0, rho=10.0, tol=1e-6))
        errs[g] = error_norms(res.solution, case)
        iters[g] = (res.iterations, res.converged)
    same = all(f"{a:.3e}" == f"{b:.3e}" for a, b in zip(errs[10.0], errs[40.0]))
    fewer = iters[0.0][0] < iters[0.015][0] and iters[0.0][1] and iters[0.015][1]
    fmt = lambda e: "/".join(f"{v:.4e}" for v in e)  # noqa: E731
    record("5a", same, f"n={n}: errors g=10 {fmt(errs[10.0])} vs g=40 {fmt(errs[40.0])} "
                       "(4 significant digits)")
    record("5b", fewer, f"n={n}: ALG2 sweeps g=0: {iters[0.0][0]}, g=0.015: {iters[0.015][0]} "
                        "(need strictly fewer for g=0)")
    assert same and fewer


def test_criterion_6_friction_law():
    case = test2_case()
    n = 64
    res = solve_case(case, n, case.config())
    s = res.solution
    g = case.config().g
    lam, ut, phi = s.multiplier, s.tangential_velocity(), s.slip
    bound = float(np.max(np.abs(lam) - g))
    compl = float(np.max(np.abs(complementarity_residual(lam, ut, g)) / (1 + np.abs(ut))))
    slip = int(np.sum(phi != 0))
    stick = int(np.sum((phi == 0) & (np.abs(lam) < g)))
    ok = res.converged and bound <= 1e-4 and compl <= 1e-4 and slip > 0 and stick > 0
    assert record(6, ok, f"n={n}: max(|lambda|-g) {bound:.1e} (<= 1e-4), "
                         f"max |sigma_t u_t + g|u_t||/(1+|u_t|) {compl:.1e} (<= 1e-4), "
                         f"slip dofs {slip}, stick dofs {stick} (both > 0)")


def test_criterion_7_projection_properties():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    N = 10_000
    xi = rng.normal(0, 10, N) * 10 ** rng.uniform(-3, 3, N)
    g = np.abs(rng.normal(0, 10, N)) * 10 ** rng.uniform(-3, 3, N)
    r = 10 ** rng.uniform(-3, 3, N)
    eta = xi + rng.normal(0, 1, N) * 10 ** rng.uniform(-3, 3, N)
    phi, phi2 = slip_projection(xi, g, r), slip_projection(eta, g, r)
    odd = np.array_equal(slip_projection(-xi, g, r), -phi)
    mono = bool(np.all((phi - phi2) * (xi - eta) >= 0))
    # exact in real arithmetic; allow rounding of |xi| - g at the operands' scale
    ulp = 8 * np.finfo(float).eps * (np.abs(xi) + np.abs(eta) + g) / r
    lip = bool(np.all(np.abs(phi - phi2) <= np.abs(xi - eta) / r + ulp))
    dead = bool(np.all(phi[np.abs(xi) <= g] == 0))
    dt = time.perf_counter() - t0
    ok = odd and mono and lip and dead and dt < 1
    assert record(7, ok, f"{N} samples: odd {odd}, monotone {mono}, 1/r-Lipschitz {lip}, "
                         f"zero on |xi|<=g {dead}; {dt:.3f}s (< 1s)")


def test_criterion_8_determinism():
    first = _STUDY.get("csv") or _smooth_study().to_csv(timings=False)
    second = _smooth_study().to_csv(timings=False)
    ok = first.encode() == second.encode()
    assert record(8, ok, f"two criterion-3 runs, CSV without wall-time column: "
                         f"{'byte-identical' if ok else 'differ'} ({len(first)} bytes)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
