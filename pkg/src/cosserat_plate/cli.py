"""Command-line front end: ``solve``, ``mms``, ``scf`` and ``mesh``.

Exit codes: 0 success, 1 configuration or input error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .assembly import BcSpec
from .config import ConfigError, RunConfig
from .export import fields_csv, resultants_csv, vtk_legacy
from .fields import manufactured_fields
from .material import MaterialError, derive_coefficients
from .mesh import (G1, G2, G3, G4, GeometryError, MeshError, TriMesh, generate_plate_with_hole,
                   generate_rectangle, metrics, refine_uniform)
from .mesh_io import MeshParseError, read_mesh, write_mesh
from .operator import LoadSpec, build_operator_table
from .postproc import (MmsProblem, convergence_study, nominal_stress, reconstruct_displacements,
                       resultants, stress_concentration)
from .solver import SolverError
from .splitting import FieldSolution, solve_fixed_eta, solve_with_splitting

log = logging.getLogger("cosserat_plate")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


class UsageError(Exception):
    pass


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    kw = {}
    if getattr(args, "solver", None):
        kw["method"] = args.solver
    if getattr(args, "tol", None) is not None:
        if not 0 < args.tol <= 1e-2:
            raise ConfigError("must lie in (0, 1e-2]", "--tol")
        kw["tol"] = args.tol
    return cfg.with_overrides(**kw) if kw else cfg


def _load_config(args) -> RunConfig:
    if not args.config:
        raise ConfigError("no configuration given", "--config")
    return _apply_flags(cfgmod.load(args.config), args)


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_mesh(cfg: RunConfig, radius=None) -> TriMesh:
    """Initial mesh of the configured geometry, refined ``cfg.refinements`` times."""
    if cfg.geometry == "msh":
        mesh = read_mesh(cfg.mesh_path)
    elif cfg.geometry == "hole" or radius is not None:
        r = radius if radius is not None else cfg.radius
        mesh = generate_plate_with_hole(cfg.a, cfg.side_b, r, cfg.center, cfg.density)
    else:
        mesh = generate_rectangle(cfg.a, cfg.side_b, cfg.nx, cfg.cells_y)
    for _ in range(cfg.refinements):
        mesh = refine_uniform(mesh)
    return mesh


def _bc(cfg: RunConfig, mesh: TriMesh) -> BcSpec:
    if cfg.bc == "clamped" and cfg.geometry == "hole":
        # outer edges clamped, hole rim free
        return BcSpec.clamped(tags={G1, G2, G3, G4})
    return BcSpec.from_name(cfg.bc)


def _load(cfg: RunConfig) -> LoadSpec:
    return LoadSpec(cfg.load_kind, cfg.load_amplitude, cfg.a, cfg.side_b)


def _solve(cfg: RunConfig, mesh: TriMesh, bc: BcSpec) -> FieldSolution:
    table = build_operator_table(derive_coefficients(cfg.material, cfg.k1))
    load = _load(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if cfg.eta is None:
            sol = solve_with_splitting(mesh, table, load, cfg.material, bc, cfg.tol, cfg.method)
        else:
            sol = solve_fixed_eta(mesh, table, load, cfg.material, bc, cfg.eta, cfg.tol,
                                  cfg.method)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return sol


def run_report(cfg: RunConfig, mesh: TriMesh, sol: FieldSolution, extra=()) -> str:
    lines = [f"nodes: {mesh.n_nodes}", f"triangles: {mesh.n_triangles}",
             f"h_max: {metrics(mesh).h_max:.6g}", f"bc: {cfg.bc}",
             f"load: {cfg.load_kind} {cfg.load_amplitude!r}"]
    rep = sol.report
    if rep is not None:
        w = rep.densities
        lines += [f"W00: {w.W00!r}", f"W01: {w.W01!r}", f"W10: {w.W10!r}", f"W11: {w.W11!r}",
                  f"eta0: {rep.eta0!r}",
                  "residuals: " + " ".join(f"{r:.3e}" for r in rep.residuals)]
        lines += [f"note: {n}" for n in rep.warnings]
    else:
        lines.append(f"eta: {sol.eta!r} (fixed)")
    disp = reconstruct_displacements(sol, cfg.material).nodal(0.0)
    lines += [f"max_abs_W: {float(np.abs(sol['W']).max())!r}",
              f"max_abs_u3_midplane: {float(np.abs(disp['u3']).max())!r}"]
    lines += list(extra)
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    mesh = build_mesh(cfg)
    bc = _bc(cfg, mesh)
    sol = _solve(cfg, mesh, bc)
    extra = []
    if args.verify_linearity:
        if sol.report is None:
            raise UsageError("--verify-linearity needs eta = auto")
        direct = _solve(cfg.with_overrides(eta=sol.eta), mesh, bc)
        diff = np.linalg.norm(direct.values - sol.values) / np.linalg.norm(direct.values)
        ok = diff <= 1e-8
        extra.append(f"linearity_relative_difference: {diff:.3e} ({'ok' if ok else 'FAILED'})")
        print(extra[-1])
        if not ok:
            raise SolverError(f"combined solution differs from direct solve by {diff:.3e}")
    load = _load(cfg)
    res = resultants(sol, mesh, cfg.material, load)
    (out / (cfg.csv or "fields.csv")).write_text(fields_csv(sol, mesh))
    (out / (cfg.resultants_csv or "resultants.csv")).write_text(resultants_csv(res, mesh))
    if cfg.vtk:
        (out / cfg.vtk).write_text(vtk_legacy(mesh, sol, res))
    report = run_report(cfg, mesh, sol, extra)
    (out / (cfg.report or "report.txt")).write_text(report)
    (out / "effective.cfg").write_text(cfg.dumps())
    sys.stdout.write(report)
    return EXIT_OK


def cmd_mms(args) -> int:
    cfg = _load_config(args)
    if cfg.geometry != "rectangle":
        raise ConfigError("manufactured solutions need a rectangle", "geometry.kind")
    if cfg.refinements < 1:
        raise ConfigError("need at least one refinement", "refinements")
    out = _out_dir(args)
    mesh = generate_rectangle(cfg.a, cfg.side_b, cfg.nx, cfg.cells_y)
    table = build_operator_table(derive_coefficients(cfg.material, cfg.k1))
    exact = manufactured_fields(cfg.bc, cfg.a, cfg.side_b, cfg.mms_amplitudes)
    problem = MmsProblem(table, exact, BcSpec.from_name(cfg.bc))
    rep = convergence_study(mesh, cfg.refinements, problem, cfg.tol, cfg.method)
    text = (f"# {cfg.bc} manufactured solution\n" + rep.table("H1") + "\n\n"
            + rep.table("L2") + "\n")
    (out / "mms.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_scf(args) -> int:
    cfg = _load_config(args)
    radii = sorted(cfg.radii)
    if len(radii) < 2:
        raise ConfigError("need ≥ 2 radii", "geometry.radii")
    out = _out_dir(args)
    center = cfg.center or (0.5 * cfg.a, 0.5 * cfg.side_b)
    load = _load(cfg)
    plain = cfg.with_overrides(geometry="rectangle")
    ref_mesh = build_mesh(plain)
    ref = _solve(plain, ref_mesh, BcSpec.from_name(cfg.bc))
    nominal = nominal_stress(ref, ref_mesh, cfg.material, load, center)
    holed = cfg.with_overrides(geometry="hole", refinements=0)
    rows = []
    for r in radii:
        mesh = build_mesh(holed, radius=r)
        sol = _solve(holed, mesh, _bc(holed, mesh))
        rows.append((r, stress_concentration(sol, mesh, cfg.material, load, nominal)))
    scf = [s for _, s in rows]
    monotone = all(b >= a for a, b in zip(scf, scf[1:]))
    above = all(s > 1 for s in scf)
    text = "radius,scf\n" + "".join(f"{r!r},{s!r}\n" for r, s in rows)
    (out / "scf.csv").write_text(text)
    sys.stdout.write(text)
    print(f"nominal stress: {nominal:.6g}")
    print(f"nondecreasing in radius: {'yes' if monotone else 'no'}")
    print(f"all above 1: {'yes' if above else 'no'}")
    return EXIT_OK


def cmd_mesh(args) -> int:
    if args.action == "generate":
        cfg = _load_config(args)
        mesh = build_mesh(cfg)
        target = args.output or str(_out_dir(args) / "mesh.msh")
        write_mesh(mesh, target)
        print(f"wrote {target}: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles")
    elif args.action == "refine":
        mesh = read_mesh(_need(args.input, "input"))
        for _ in range(args.times):
            mesh = refine_uniform(mesh)
        write_mesh(mesh, _need(args.output, "--output"))
        print(f"wrote {args.output}: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles")
    elif args.action == "info":
        mesh = read_mesh(_need(args.input, "input"))
        mt = metrics(mesh)
        print(f"nodes: {mt.n_nodes}\ntriangles: {mt.n_triangles}\nh_max: {mt.h_max:.6g}")
        print("tags: " + " ".join(str(t) for t in sorted(mesh.tags())))
    else:
        mesh = read_mesh(_need(args.input, "input"))
        write_mesh(mesh, _need(args.output, "--output"))
        print(f"wrote {args.output}")
    return EXIT_OK


def _need(value, name):
    if not value:
        raise UsageError(f"missing {name}")
    return value


class _Parser(argparse.ArgumentParser):
    # argparse would exit with 2, which is reserved for solver failures
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cosserat-plate",
                                description="Finite elements for Cosserat plate bending.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, solver=True):
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--out", metavar="DIR")
        if solver:
            sp.add_argument("--solver", choices=("direct", "iterative"))
            sp.add_argument("--tol", type=float, metavar="X")

    s = sub.add_parser("solve", help="solve one plate problem")
    common(s)
    s.add_argument("--verify-linearity", action="store_true",
                   help="check the combined solution against a direct solve at eta0")
    s.set_defaults(func=cmd_solve)
    s = sub.add_parser("mms", help="manufactured-solution convergence study")
    common(s)
    s.set_defaults(func=cmd_mms)
    s = sub.add_parser("scf", help="stress concentration for several hole radii")
    common(s)
    s.set_defaults(func=cmd_scf)
    s = sub.add_parser("mesh", help="mesh utilities")
    s.add_argument("action", choices=("generate", "refine", "info", "convert"))
    s.add_argument("input", nargs="?")
    s.add_argument("-o", "--output")
    s.add_argument("-n", "--times", type=int, default=1)
    common(s, solver=False)
    s.set_defaults(func=cmd_mesh)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as stop:
        return int(stop.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, MaterialError, MeshParseError, MeshError, GeometryError,
            UsageError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
