"""Command line: ``tresca-stokes solve ...`` and ``tresca-stokes study ...``.

Settings are resolved as CLI flags > ``--config`` file (``key = value``
lines, ``#`` comments) > defaults of the chosen case.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .io import write_gamma_profile, write_mesh_vtk, write_solution_vtk

CONFIG_KEYS = {"g": float, "r": float, "rho": float, "nu": float, "tol": float,
               "max_iters": int, "strain_factor": int, "n": int, "ref_n": int,
               "n_list": str, "case": str, "out": str, "csv": str}


def read_config(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = CONFIG_KEYS[key](value)
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file")
    p.add_argument("--g", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--strain-factor", dest="strain_factor", type=int, choices=(1, 2))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tresca-stokes")
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="one ALG2 solve")
    s.add_argument("--case", choices=("test1", "test2", "noslip"))
    s.add_argument("--n", type=int)
    s.add_argument("--out")
    _common(s)
    st = sub.add_parser("study", help="convergence study")
    st.add_argument("--case", choices=("test1", "test2", "noslip"))
    st.add_argument("--n-list", dest="n_list")
    st.add_argument("--ref-n", dest="ref_n", type=int)
    st.add_argument("--csv")
    _common(st)
    return ap


def _settings(args) -> dict:
    cfg = read_config(args.config) if args.config else {}
    for k, v in vars(args).items():
        if v is not None and k in CONFIG_KEYS:
            cfg[k] = v
    return cfg


def _case(cfg: dict):
    name = cfg.get("case")
    if name is None:
        raise SystemExit("error: --case is required")
    kw = {k: cfg[k] for k in ("nu", "strain_factor") if k in cfg}
    if "g" in cfg and name != "noslip":
        kw["g"] = cfg["g"]
    return harness.CASES[name](**kw)


def _tresca_config(case, cfg: dict):
    return case.config(**{k: cfg[k] for k in ("r", "rho", "tol", "max_iters") if k in cfg})


def cmd_solve(args) -> int:
    cfg = _settings(args)
    case = _case(cfg)
    n = cfg.get("n", 32)
    out = Path(cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    mesh = case.mesh(n)
    dofmap = case.dofmap(mesh)
    trace = out / "trace.csv" if args.verbose else None
    res = harness.alg2_solve(mesh, dofmap, _tresca_config(case, cfg), case.forcing, trace_csv=trace)
    write_mesh_vtk(mesh, out / "mesh.vtk")
    write_solution_vtk(res.solution, out / "solution.vtk")
    if dofmap.n_multiplier:
        write_gamma_profile(res.solution, out / "gamma_profile.csv")
    status = "converged" if res.converged else "NOT converged"
    print(f"{case.name} n={n} h={mesh.h:.4e}: {res.iterations} sweeps, {status}")
    if case.has_exact:
        e0, e1, ep = harness.error_norms(res.solution, case)
        print(f"  |u-uh|_0={e0:.4e}  |u-uh|_1={e1:.4e}  |p-ph|_0={ep:.4e}")
    return 0 if res.converged else 1


def cmd_study(args) -> int:
    cfg = _settings(args)
    case = _case(cfg)
    ns = [int(s) for s in cfg.get("n_list", "16,32,64,128").split(",")]
    ref_n = cfg.get("ref_n")
    if not case.has_exact and ref_n is None:
        ref_n = 512
    csv_path = cfg.get("csv", "report.csv")
    rep = harness.run_study(case, ns, _tresca_config(case, cfg), ref_n=ref_n, csv_path=csv_path)
    sys.stdout.write(rep.to_csv())
    return 0 if rep.all_converged else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return {"solve": cmd_solve, "study": cmd_study}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
