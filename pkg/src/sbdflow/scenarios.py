"""Filtration problem: a parabolic inflow from below, pushed through the
porous medium and the transition zone, leaving the free-flow channel on
the right.  Runs both models on the same h and compares them on the
interface.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .assembly_full import assemble_full
from .assembly_reduced import assemble_reduced
from .boundary import (BC, BoundarySpecFull, BoundarySpecReduced, GammaBoundarySpec,
                       GammaEnd, SourceFieldsFull, SourceFieldsReduced, zero_line,
                       zero_scalar, zero_vector)
from .core import ClosureProfile, PhysicalParams, SymTensor2, ValidationError
from .grid import GeometryConfig, Model, StaggeredGrid, build_grid
from .solver import Method, solve

FILTRATION_PARAMS = PhysicalParams(mu=1e-3, mu_eff=1e-3, alpha=1.0, beta=SymTensor2(0, 0, 0),
                                   K_tr=SymTensor2.iso(1e-3), K_pm=SymTensor2.iso(1e-8))
INFLOW = (0.25, 0.75)
TOTAL_INFLOW = 0.1 * 0.5 ** 3 / 6


def inflow_flux(x, y=None):
    """Outward normal flux on the porous bottom (negative where fluid enters)."""
    x = np.asarray(x, float)
    a, b = INFLOW
    return np.where((x >= a) & (x <= b), 0.1 * (x - a) * (x - b), 0.0)


@dataclass(frozen=True)
class FiltrationConfig:
    h: float
    Lx: float = 1.0
    Ly: float = 1.005
    y_gamma_pm: float = 0.5
    y_gamma_ff: float = 0.505
    params: PhysicalParams = FILTRATION_PARAMS

    @property
    def d(self):
        return self.y_gamma_ff - self.y_gamma_pm

    def errors(self):
        errs = []
        K, Kt = self.params.K_pm, self.params.K_tr
        if not (abs(K.xx) <= abs(Kt.xx) and abs(K.xy) <= abs(Kt.xy) and abs(K.yy) <= abs(Kt.yy)):
            errs.append("K_pm must not exceed K_tr entrywise")
        m = self.d / self.h
        if not self.h > 0 or abs(m - round(m)) > 1e-9 * max(1.0, m) or round(m) < 1:
            errs.append(f"h={self.h} does not resolve d={self.d:g} with whole cells")
        return errs

    def grid(self, model) -> StaggeredGrid:
        model = Model(model) if not isinstance(model, Model) else model
        errs = self.errors()
        if errs:
            raise ValidationError(errs)
        nx = round(self.Lx / self.h)
        if model is Model.FULL:
            ny = round(self.Ly / self.h)
        else:
            ny = round((self.Ly - self.d) / self.h)
        geo = GeometryConfig(self.Lx, self.Ly, self.y_gamma_pm, self.y_gamma_ff, nx, ny)
        return build_grid(geo, model)


def filtration_bcs():
    """Boundary data for (full, reduced) plus the interface-end conditions."""
    wall = BC.no_slip()
    closed = BC.flux(0.0)
    inflow = BC.flux(inflow_flux)
    full = BoundarySpecFull(ff_left=wall, ff_right=BC.do_nothing(), ff_top=wall,
                            tr_left=wall, tr_right=wall,
                            pm_left=closed, pm_right=closed, pm_bottom=inflow)
    reduced = BoundarySpecReduced(ff_left=wall, ff_right=BC.do_nothing(), ff_top=wall,
                                  pm_left=closed, pm_right=closed, pm_bottom=inflow)
    ends = GammaBoundarySpec(GammaEnd("dirichlet"), GammaEnd("dirichlet"))
    return full, reduced, ends


# ------------------------------------------------------------ post-processing
def average_full_across_transition(x: np.ndarray, grid: StaggeredGrid):
    """Averages of the transition-zone fields over [y_pm, y_ff], per interface cell.

    v sits on horizontal faces, so both ends are available and the
    composite trapezoid rule is used.  u and p sit at row centres and use
    the midpoint rule; u is then averaged from vertical faces to cell
    centres.  One transition row is enough.
    """
    if grid.model is not Model.FULL:
        raise ValidationError("averaging needs a full-model solution")
    m = grid.n_tr
    if m < 1:
        raise ValidationError("transition zone is not resolved")
    f = grid.dofmap.split(x)
    u, v, p = f["u"][:, :m], f["v"][:, :m + 1], f["p"][:, :m]
    w = np.ones(m + 1)
    w[[0, -1]] = 0.5
    v_ave = v @ w / m
    p_ave = p.mean(axis=1)
    uf = u.mean(axis=1)
    u_ave = 0.5 * (uf[:-1] + uf[1:])
    return u_ave, v_ave, p_ave


def reduced_gamma_fields(x: np.ndarray, grid: StaggeredGrid):
    """(U, V, P) = (V_tau, V_n, P) of a reduced solution."""
    f = grid.dofmap.split(x)
    return f["V_t"], f["V_n"], f["P"]


@dataclass
class DeviationReport:
    eps: dict = field(default_factory=dict)        # profile -> (eps_u, eps_v, eps_p)
    cpu_full: float = float("nan")
    cpu_reduced: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)     # label -> (assembly cpu, solve cpu)
    mass_balance: dict = field(default_factory=dict)
    h: float = float("nan")

    def rows(self):
        for name, (eu, ev, ep) in self.eps.items():
            yield name, eu, ev, ep, self.cpu_full, self.cpu_reduced.get(name, float("nan"))


def _rel(a, b):
    den = np.linalg.norm(a)
    if den < 1e-14:
        return float("nan")
    return float(np.linalg.norm(a - b) / den)


def relative_deviations(full_averaged, reduced):
    """Relative discrete L2 deviations (eps_u, eps_v, eps_p) on the interface.

    The uniform cell width cancels in the ratio.
    """
    out = []
    for a, b in zip(full_averaged, reduced):
        a, b = np.asarray(a, float), np.asarray(b, float)
        if a.shape != b.shape:
            raise ValidationError(f"interface discretisations differ: {a.shape} vs {b.shape}")
        out.append(_rel(a, b))
    return tuple(out)


def extract_profile(x: np.ndarray, grid: StaggeredGrid, y: float):
    """u and v along the horizontal grid line y, both at cell-centre abscissae.

    Returns (x1, u, v).  u is averaged from the two neighbouring faces.
    """
    f = grid.dofmap.split(x)
    ys = grid.yf_s
    J = int(np.argmin(np.abs(ys - y)))
    if abs(ys[J] - y) > 1e-9 * max(1.0, abs(y)):
        raise ValidationError(f"y={y} is not a grid line of the Stokes region")
    v = f["v"][:, J]
    if J == 0:
        uf = f["u_gpm"] if grid.model is Model.FULL else f["u_gff"]
    elif J == grid.n_tr:
        uf = f["u_gff"]
    elif J == grid.ns:
        uf = f["u_top"]
    else:
        uf = 0.5 * (f["u"][:, J - 1] + f["u"][:, J])
    return grid.xc.copy(), 0.5 * (uf[:-1] + uf[1:]), v.copy()


def mass_balance(x: np.ndarray, grid: StaggeredGrid):
    """(inflow, outflow, relative imbalance) of a filtration solution."""
    f = grid.dofmap.split(x)
    inflow = -float(np.sum(inflow_flux(grid.xc)) * grid.hx)
    rows = np.flatnonzero(np.array(grid.region_of_row[grid.n_pm:]) == "ff")
    outflow = float(np.sum(f["u"][-1, rows]) * grid.hy)
    return inflow, outflow, abs(outflow - inflow) / inflow


# ------------------------------------------------------------ driver
def _solve_timed(assemble, method, tol):
    system = assemble()
    rep = solve(system, method=method, tol=tol)
    return system, rep, system.assembly_cpu, rep.cpu


def solve_full(cfg: FiltrationConfig, method=Method.AUTO, tol=1e-10):
    grid = cfg.grid(Model.FULL)
    bf, _, _ = filtration_bcs()
    src = SourceFieldsFull(zero_vector, zero_vector, zero_scalar)
    system, rep, ca, cs = _solve_timed(lambda: assemble_full(grid, cfg.params, src, bf), method, tol)
    return grid, rep.solution, (ca, cs), rep


def solve_reduced(cfg: FiltrationConfig, profile, method=Method.AUTO, tol=1e-10):
    grid = cfg.grid(Model.REDUCED)
    _, br, ends = filtration_bcs()
    src = SourceFieldsReduced(zero_vector, zero_scalar, zero_line, zero_line)
    system, rep, ca, cs = _solve_timed(
        lambda: assemble_reduced(grid, cfg.params, profile, src, br, ends), method, tol)
    return grid, rep.solution, (ca, cs), rep


@dataclass
class FiltrationResult:
    report: DeviationReport
    full: tuple          # (grid, x)
    reduced: dict        # profile name -> (grid, x)


def run_filtration(h: float, profiles=("linear", "piecewise_linear", "quadratic"),
                   method=Method.AUTO, tol=1e-10) -> FiltrationResult:
    """Solve the full model once and the reduced model per profile, then compare.

    CPU times cover assembly and solve only.  Runs are sequential so the
    timings do not compete for cores.
    """
    cfg = FiltrationConfig(h)
    rep = DeviationReport(h=h)
    gf, xf, (ca, cs), _ = solve_full(cfg, method, tol)
    rep.cpu_full = ca + cs
    rep.timings["full"] = (ca, cs)
    rep.mass_balance["full"] = mass_balance(xf, gf)
    ave = average_full_across_transition(xf, gf)
    reduced = {}
    for name in profiles:
        prof = name if isinstance(name, ClosureProfile) else ClosureProfile.named(name)
        gr, xr, (ra, rs), _ = solve_reduced(cfg, prof, method, tol)
        key = prof.name
        rep.cpu_reduced[key] = ra + rs
        rep.timings[key] = (ra, rs)
        rep.mass_balance[key] = mass_balance(xr, gr)
        rep.eps[key] = relative_deviations(ave, reduced_gamma_fields(xr, gr))
        reduced[key] = (gr, xr)
    return FiltrationResult(rep, (gf, xf), reduced)


def profile_table(result: FiltrationResult, profile: str, y: float = 0.505):
    """Columns for the profile CSV: x1, full u and v on the line, reduced
    bulk traces there, and the reduced interface unknowns at the same abscissae."""
    gf, xf = result.full
    gr, xr = result.reduced[profile]
    x1, uf, vf = extract_profile(xf, gf, y)
    _, ur, vr = extract_profile(xr, gr, y)
    U, V, _ = reduced_gamma_fields(xr, gr)
    return {"x1": x1, "u_full": uf, "v_full": vf, "u_reduced_interp": ur,
            "v_reduced_interp": vr, "U_gamma": U, "V_gamma": V}
