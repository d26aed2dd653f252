"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 solver failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .boundary import (BC, BoundarySpecFull, BoundarySpecReduced, GammaBoundarySpec, GammaEnd,
                       SourceFieldsFull, SourceFieldsReduced, zero_line, zero_scalar, zero_vector)
from .core import ClosureProfile, ValidationError
from .grid import Model, build_grid
from .solver import Method, SolverError, solve

log = logging.getLogger("sbdflow")

_OUTWARD = {"ff_left": (-1, 0), "ff_right": (1, 0), "ff_top": (0, 1), "tr_left": (-1, 0),
            "tr_right": (1, 0), "pm_left": (-1, 0), "pm_right": (1, 0), "pm_bottom": (0, -1)}


def _bc_from_entry(seg, e: io.BCEntry, cfg: io.RunConfig) -> BC:
    from .scenarios import inflow_flux
    from .verification import ExactSolutionFull

    kind = e.kind
    if kind in ("no_slip", "do_nothing"):
        return getattr(BC, kind)()
    data = e.data
    if data in ((), "zero"):
        val = (0.0, 0.0) if kind in ("velocity", "traction") else 0.0
    elif data == "parabola_inflow":
        if kind != "flux":
            raise ValidationError(f"bc.{seg}: parabola_inflow is flux data")
        val = inflow_flux
    elif data == "exact":
        ex = ExactSolutionFull(cfg.y_gamma_pm)
        prm = cfg.params
        nu = prm.mu if seg.startswith("ff") else prm.mu_eff
        val = {"velocity": ex.velocity, "traction": ex.traction(nu, _OUTWARD[seg]),
               "pressure": ex.p_pm,
               "flux": ex.darcy_flux(prm.K_pm, prm.mu, _OUTWARD[seg])}[kind]
    else:
        val = data if len(data) == 2 else data[0]
    return getattr(BC, kind)(val)


def _custom_system(cfg: io.RunConfig):
    from .assembly_full import assemble_full
    from .assembly_reduced import assemble_reduced

    model = Model(cfg.model)
    grid = build_grid(cfg.geometry, model)
    bcs = {k: _bc_from_entry(k, v, cfg) for k, v in cfg.bc.items() if k not in io.GAMMA_ENDS}
    if model is Model.FULL:
        spec = BoundarySpecFull(**{k: bcs[k] for k in io.BC_SEGMENTS_FULL})
        system = assemble_full(grid, cfg.params, SourceFieldsFull(zero_vector, zero_vector,
                                                                  zero_scalar), spec)
    else:
        spec = BoundarySpecReduced(**{k: bcs[k] for k in io.BC_SEGMENTS_FULL
                                      if not k.startswith("tr_")})
        ends = GammaBoundarySpec(*(GammaEnd(cfg.bc[k].kind, *cfg.bc[k].data) for k in io.GAMMA_ENDS))
        system = assemble_reduced(grid, cfg.params, cfg.closure,
                                  SourceFieldsReduced(zero_vector, zero_scalar, zero_line, zero_line),
                                  spec, ends)
    return grid, system


# ------------------------------------------------------------------ commands
def _print_slopes(report):
    print(f"{'field':8s} {'slope':>7s}  successive orders")
    for k in report.errors:
        orders = " ".join(f"{o:6.3f}" for o in report.orders[k])
        print(f"{k:8s} {report.slopes[k]:7.3f}  {orders}")


def _converge(model, levels, out, profile="quadratic", method="auto"):
    from .verification import convergence_study
    rep = convergence_study(model, levels, profile=ClosureProfile.named(profile), method=method)
    path = io.write_convergence_csv(rep, out)
    _print_slopes(rep)
    print(f"wrote {path}")
    return rep


def _filtration(h_inv, profiles, out, method="auto", vtk=False):
    from .scenarios import profile_table, run_filtration
    res = run_filtration(1.0 / h_inv, profiles, method=method)
    rep = res.report
    io.write_deviations_csv(rep, out)
    prof = "quadratic" if "quadratic" in res.reduced else next(iter(res.reduced))
    io.write_profile_csv(profile_table(res, prof), out)
    gr, xr = res.reduced[prof]
    io.write_gamma_csv(gr, xr, out)
    if vtk:
        from .scenarios import FILTRATION_PARAMS
        io.write_vtk(res.full[0], res.full[1], Path(out) / "filtration_full.vtk", FILTRATION_PARAMS)
        io.write_vtk(gr, xr, Path(out) / f"filtration_reduced_{prof}.vtk", FILTRATION_PARAMS)
    print(f"h = 1/{h_inv}")
    print(f"{'profile':18s} {'eps_u':>11s} {'eps_v':>11s} {'eps_p':>11s}")
    for name, (eu, ev, ep) in rep.eps.items():
        print(f"{name:18s} {eu:11.4e} {ev:11.4e} {ep:11.4e}")
    print(f"cpu full {rep.cpu_full:.2f}s, reduced "
          + ", ".join(f"{k} {v:.2f}s" for k, v in rep.cpu_reduced.items()))
    for k, (qin, qout, rel) in rep.mass_balance.items():
        print(f"mass balance {k}: in {qin:.6e} out {qout:.6e} rel {rel:.2e}")
    print(f"wrote results to {out}")
    return res


def _run(cfg: io.RunConfig):
    out = cfg.output_dir()
    method = cfg.method
    if cfg.scenario in ("mms-full", "mms-reduced"):
        return _converge(cfg.scenario.split("-")[1], list(cfg.levels), out, cfg.profile, method)
    if cfg.scenario == "filtration":
        profiles = ("linear", "piecewise_linear", "quadratic")
        return _filtration(cfg.levels[0], profiles, out, method, vtk=True)
    grid, system = _custom_system(cfg)
    rep = solve(system, Method(method), tol=cfg.tol)
    io.write_vtk(grid, rep.solution, out / f"solution_{cfg.model}.vtk", cfg.params)
    if grid.model is Model.REDUCED:
        io.write_gamma_csv(grid, rep.solution, out)
    print(f"solved {system.n} unknowns with {rep.method}, residual {rep.residual:.2e}")
    print(f"wrote results to {out}")
    return rep


def _dump(args):
    if args.config:
        cfg = io.parse_config(args.config)
        grid, system = _custom_system(_require_custom(cfg))
    else:
        from .verification import (mms_bcs_full, mms_grid_full, mms_sources_full, MMS_PARAMS)
        from .assembly_full import assemble_full
        grid = mms_grid_full(args.n)
        y0 = grid.geometry.y_gamma_pm
        system = assemble_full(grid, MMS_PARAMS, mms_sources_full(MMS_PARAMS, y0),
                               mms_bcs_full(MMS_PARAMS, y0))
    path = io.write_matrix(system, args.output)
    print(f"wrote {system.n}x{system.n} matrix with {system.matrix.nnz} nonzeros to {path}")


def _require_custom(cfg):
    if cfg.scenario != "custom":
        raise ValidationError("dump-matrix --config needs scenario = custom")
    return cfg


def build_parser():
    ap = argparse.ArgumentParser(prog="sbdflow", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def outdir(p):
        p.add_argument("--out", default=None,
                       help=f"output directory (default results, or ${io.OUTPUT_ENV})")

    for name in ("converge-full", "converge-reduced"):
        p = sub.add_parser(name, help="manufactured-solution convergence study")
        p.add_argument("--levels", type=int, default=4, help="number of grids")
        p.add_argument("--base", type=int, default=20 if name == "converge-full" else 16,
                       help="cells per unit length on the coarsest grid")
        p.add_argument("--profile", default="quadratic")
        p.add_argument("--method", default="auto", choices=["direct", "krylov", "auto"])
        outdir(p)
    p = sub.add_parser("filtration", help="filtration problem, both models")
    p.add_argument("--h", type=int, default=200, help="inverse grid size (200 means h=1/200)")
    p.add_argument("--full-res", action="store_true", help="use h=1/800")
    p.add_argument("--profile", action="append",
                   choices=["linear", "piecewise_linear", "quadratic"],
                   help="closure profile (repeatable; default all three)")
    p.add_argument("--method", default="auto", choices=["direct", "krylov", "auto"])
    p.add_argument("--vtk", action="store_true", help="also write VTK files")
    outdir(p)
    p = sub.add_parser("run", help="run a configuration file")
    p.add_argument("--config", required=True)
    p = sub.add_parser("dump-matrix", help="write an assembled matrix in MatrixMarket format")
    p.add_argument("--config", default=None, help="custom-scenario config (default: full MMS grid)")
    p.add_argument("--n", type=int, default=20, help="MMS grid cells per unit length")
    p.add_argument("--output", default="matrix.mtx")
    return ap


def main(argv=None) -> int:
    import os
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(getattr(args, "out", None) or os.environ.get(io.OUTPUT_ENV) or "results")
    try:
        if args.cmd in ("converge-full", "converge-reduced"):
            if args.levels < 3:
                raise ValidationError("--levels must be at least 3")
            levels = [args.base * 2 ** k for k in range(args.levels)]
            _converge(args.cmd.split("-")[1], levels, out, args.profile, args.method)
        elif args.cmd == "filtration":
            h = 800 if args.full_res else args.h
            profiles = tuple(args.profile or ("linear", "piecewise_linear", "quadratic"))
            _filtration(h, profiles, out, args.method, args.vtk)
        elif args.cmd == "run":
            _run(io.parse_config(args.config))
        else:
            _dump(args)
    except ValidationError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver failure: {exc} (residual {exc.residual:.3e})", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
