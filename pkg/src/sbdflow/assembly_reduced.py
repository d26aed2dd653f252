"""Monolithic system for the reduced model: Stokes, Darcy and a 1D interface.

The transition zone is collapsed onto a line carrying the averaged normal
velocity V_n, tangential velocity V_t and pressure P at the nx cell-centre
abscissae.  Per interface cell three equations hold:

    mass        v_ff - q + d dV_t/dx = 0
    normal      (2 mue (l1+l2)/d + d mu M_nn) V_n + d mu M_nt V_t
                - d mue V_n'' - mue (l1+l2)/d (v_ff + q) = d F_n
    tangential  d mu M_tn V_n + (B + d mu M_tt) V_t - d mue V_t''
                + d P' - A6 u_ff = d F_t

where q is the porous-side normal velocity.  It is eliminated through the
pressure transmission condition, and the same expression feeds the Darcy
flux stencil, so each trace has one discrete definition.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, fields

import numpy as np

from ._darcy import DarcyBlock
from ._stencil import SystemBuilder, VExpr, concat, fd_weights
from ._stokes import StokesBlock
from .boundary import BoundarySpecReduced, GammaBoundarySpec, SourceFieldsReduced, eval_scalar
from .core import ClosureProfile, PhysicalParams, ValidationError, check_params
from .grid import Model, StaggeredGrid
from .solver import LinearSystem


@dataclass(frozen=True)
class ReducedCoefficients:
    """Scalar coefficients of the interface equations and transmission conditions."""

    d: float
    lambda1: float
    lambda2: float
    A4: float    # multiplies u_ff in the tangential transmission condition
    A6: float    # multiplies V_t there and u_ff in the tangential momentum
    B12: float   # V_t coefficient of the tangential momentum (without drag)
    Cn: float    # mue (l1^2 - l2^2) / (l1 d)
    M_nn: float
    M_nt: float
    M_tt: float

    @classmethod
    def build(cls, params: PhysicalParams, profile: ClosureProfile, d: float):
        if not d > 0:
            raise ValidationError("d must be positive")
        l1, l2 = profile.lambda1, profile.lambda2
        mue, a = params.mu_eff, params.alpha
        sk = math.sqrt(params.K_pm_ref)
        den = d * (a * d + 4 * sk)
        Ki = params.K_tr.inv()
        return cls(d, l1, l2,
                   A4=mue * (4 * a * d + 12 * sk) / den,
                   A6=mue * (6 * a * d + 12 * sk) / den,
                   B12=mue * (12 * a * d + 12 * sk) / den,
                   Cn=mue * (l1 * l1 - l2 * l2) / (l1 * d),
                   M_nn=Ki.yy, M_nt=Ki.xy, M_tt=Ki.xx)


def tangential_closure(params: PhysicalParams, d: float, V_tau, u_ff):
    """Quadratic tangential profile: (velocity at the porous side, du/dn at the free-flow side)."""
    sk = math.sqrt(params.K_pm_ref)
    a = params.alpha
    den = a * d + 4 * sk
    v_pm = 2 * sk * (3 * V_tau - u_ff) / den
    dudn = (-6 * (a * d + 2 * sk) * V_tau + 4 * (a * d + 3 * sk) * u_ff) / (d * den)
    return v_pm, dudn


def normal_closure(profile: ClosureProfile, d: float, V_n, v_ff, v_pm):
    """Normal derivative of the normal velocity on both sides of the zone."""
    l1, l2 = profile.lambda1, profile.lambda2
    at_ff = (-(l1 + l2) * V_n + l1 * v_ff + l2 * v_pm) / d
    at_pm = ((l1 + l2) * V_n - l2 * v_ff - l1 * v_pm) / d
    return at_ff, at_pm


def _place(e: VExpr, row: int, n: int) -> VExpr:
    """Embed a single-row expression at ``row`` of an n-row expression."""
    terms = []
    for c, w in e.terms:
        cols = np.full(n, -1, dtype=np.int64)
        coef = np.zeros(n)
        cols[row] = np.asarray(c).ravel()[0]
        coef[row] = np.broadcast_to(w, np.shape(c)).ravel()[0]
        terms.append((cols, coef))
    const = np.zeros(n)
    const[row] = e.const[0]
    return VExpr(n, terms, const)


class _Line:
    """Difference operators on the interface line with end closures."""

    def __init__(self, grid, dm, gb: GammaBoundarySpec, mue):
        self.n = grid.nx
        self.h = grid.hx
        self.dm = dm
        self.gb = gb
        self.mue = mue
        iP = dm.idx("P")
        # quadratic extrapolation of P to the ends, third-order accurate
        self.P_end = {
            "left": VExpr.dof(iP[[0]], 15 / 8) + VExpr.dof(iP[[1]], -10 / 8) + VExpr.dof(iP[[2]], 3 / 8),
            "right": VExpr.dof(iP[[-1]], 15 / 8) + VExpr.dof(iP[[-2]], -10 / 8) + VExpr.dof(iP[[-3]], 3 / 8),
        }

    def end_datum(self, name, side):
        """(kind, expression) of the end datum for V_n or V_t."""
        end = getattr(self.gb, side)
        comp = end.n if name == "V_n" else end.tau
        if end.dirichlet:
            return "v", VExpr.value([comp])
        if name == "V_n":
            return "d", VExpr.value([comp / self.mue])
        return "d", (self.P_end[side] + comp) / self.mue

    def deriv(self, name: str, order: int) -> VExpr:
        n, h = self.n, self.h
        idx = self.dm.idx(name)
        k = np.arange(n)
        kk = np.clip(k, 1, n - 2)
        if order == 1:
            w = np.array([-0.5, 0.0, 0.5]) / h
        else:
            w = np.array([1.0, -2.0, 1.0]) / h**2
        inner = np.ones(n)
        inner[[0, -1]] = 0.0
        e = VExpr(n, [(idx[kk + s], w[s + 1] * inner) for s in (-1, 0, 1) if w[s + 1] != 0])
        for side, row, sgn in (("left", 0, 1), ("right", n - 1, -1)):
            kind, datum = self.end_datum(name, side)
            nodes = [-0.5 * sgn] + [sgn * t for t in range(order + 1)]
            wts = fd_weights(nodes, order, h, kind + "v" * (order + 1))
            piece = datum * wts[0]
            for t in range(order + 1):
                piece = piece + VExpr.dof(idx[[row + sgn * t]], wts[t + 1])
            e = e + _place(piece, row, n)
        return e

    def at_faces(self, name: str) -> VExpr:
        """Cubic interpolation to the u abscissae x_0..x_nx.

        End values come from Dirichlet data or one-sided extrapolation.
        The coupling coefficients scale like 1/d, so the interpolation must
        be fourth-order to keep the discrete coupling second-order overall.
        """
        n, h = self.n, self.h
        idx = self.dm.idx(name)
        pieces = []
        for f in range(n + 1):
            lo = min(max(f - 2, 0), n - 4)
            cen = list(range(lo, lo + 4))
            nodes = [c + 0.5 - f for c in cen]
            end = None
            if f == 0:
                end = self.gb.left
            elif f == n:
                end = self.gb.right
            if end is not None and end.dirichlet:
                pieces.append(VExpr.value([end.n if name == "V_n" else end.tau]))
                continue
            if end is None and (f == 1 or f == n - 1):
                side = self.gb.left if f == 1 else self.gb.right
                if side.dirichlet:
                    # use the end datum in place of the farthest centre
                    xe = -f if f == 1 else n - f
                    cen = cen[:3] if f == 1 else cen[1:]
                    nodes = [c + 0.5 - f for c in cen] + [xe]
            w = fd_weights(nodes, 0, h)
            piece = None
            for k, c in enumerate(cen):
                t = VExpr.dof(idx[[c]], w[k])
                piece = t if piece is None else piece + t
            if len(nodes) > len(cen):
                val = side.n if name == "V_n" else side.tau
                piece = piece + w[-1] * val
            pieces.append(piece)
        return concat(pieces)

    def to_centres(self, e: VExpr) -> VExpr:
        """Cubic interpolation of an expression given at the u abscissae."""
        n, h = self.n, self.h
        lo = np.clip(np.arange(n) - 1, 0, n - 3)
        F = lo[None, :] + np.arange(4)[:, None]
        W = np.empty((4, n))
        for c in range(n):
            W[:, c] = fd_weights(F[:, c] - c - 0.5, 0, h)
        terms = []
        for cols, coef in e.terms:
            coef = np.broadcast_to(coef, cols.shape)
            terms += [(cols[F[k]], coef[F[k]] * W[k]) for k in range(4)]
        return VExpr(n, terms, (e.const[F] * W).sum(axis=0))

    def dP(self) -> VExpr:
        n, h = self.n, self.h
        iP = self.dm.idx("P")
        k = np.arange(n)
        kk = np.clip(k, 1, n - 2)
        inner = np.ones(n)
        inner[[0, -1]] = 0.0
        e = VExpr(n, [(iP[kk - 1], -0.5 / h * inner), (iP[kk + 1], 0.5 / h * inner)])
        for row, sgn in ((0, 1), (n - 1, -1)):
            piece = (VExpr.dof(iP[[row]], -1.5) + VExpr.dof(iP[[row + sgn]], 2.0)
                     + VExpr.dof(iP[[row + 2 * sgn]], -0.5)) * (sgn / h)
            e = e + _place(piece, row, n)
        return e


def _line_data(f, s):
    return np.zeros(np.shape(s)) if f is None else eval_scalar(f, s)


def assemble_reduced(grid: StaggeredGrid, params: PhysicalParams, profile: ClosureProfile,
                     sources: SourceFieldsReduced, bcs: BoundarySpecReduced,
                     gamma_bcs: GammaBoundarySpec) -> LinearSystem:
    if grid.model is not Model.REDUCED:
        raise ValidationError("assemble_reduced needs a reduced-model grid")
    check_params(params)
    bcs.validate()
    c0, t0 = time.process_time(), time.perf_counter()
    dm = grid.dofmap
    B = SystemBuilder(dm.n)
    bmap = {f.name: getattr(bcs, f.name) for f in fields(bcs)}
    blk = StokesBlock(grid, params, B, bmap, {"ff": sources.f_ff})
    blk.assemble_bulk()
    blk.assemble_sides()
    blk.assemble_top()
    darcy = DarcyBlock(grid, params, B, bmap, sources.q)

    cf = ReducedCoefficients.build(params, profile, grid.geometry.d)
    d, l1, l2 = cf.d, cf.lambda1, cf.lambda2
    mu, mue = params.mu, params.mu_eff
    K = params.K_pm
    beta, jump = params.beta, params.jump_coeff
    nx = grid.nx
    cells = np.arange(nx)
    iVn, iVt, iP = dm.idx("V_n"), dm.idx("V_t"), dm.idx("P")
    vG = VExpr.dof(blk.iv[cells, 0])
    Vn, Vt, P = VExpr.dof(iVn), VExpr.dof(iVt), VExpr.dof(iP)
    line = _Line(grid, dm, gamma_bcs, mue)

    # porous-side normal velocity from the pressure transmission condition,
    # solved together with the Darcy trace p = p0 + wg * slope
    wg = darcy.trace_weights()[0]
    p0 = darcy.trace(VExpr.value(np.zeros(nx)))
    c = d / (mue * l1)
    rhs = (Vn * (l1 + l2) - vG * l2) / l1 + (p0 - P - _line_data(sources.g_pressure, grid.xc)) * c
    if K.xy != 0:
        rhs = rhs - darcy.px_at_top() * (c * wg * K.xy / K.yy)
    q = rhs / (1.0 + c * wg * mu / K.yy)
    slope = q * (-mu / K.yy)
    if K.xy != 0:
        slope = slope - darcy.px_at_top() * (K.xy / K.yy)
    darcy.assemble(slope)

    # (a) interface mass
    B.claim(iP, "gamma_mass")
    B.add_expr(iP, vG - q + line.deriv("V_t", 1) * d)
    # (b) normal momentum
    s = grid.xc
    e = (Vn * (2 * mue * (l1 + l2) / d + d * mu * cf.M_nn) + Vt * (d * mu * cf.M_nt)
         - line.deriv("V_n", 2) * (d * mue) - (vG + q) * (mue * (l1 + l2) / d))
    B.claim(iVn, "gamma_normal")
    B.add_expr(iVn, e, d * eval_scalar(sources.F_n, s))
    # tangential transmission condition at the u abscissae (beta terms included)
    ug = dm.idx("u_gff")
    allc = np.arange(nx + 1)
    trans = (blk.u_dy_at_trace("u_gff", +1, allc) * mu - VExpr.dof(ug) * cf.A4
             + line.at_faces("V_t") * cf.A6)
    if beta.xx or beta.xy:
        trans = trans - (VExpr.dof(ug, beta.xx) + blk.v_at_faces(0) * beta.xy) * jump
    # (c) tangential momentum minus the transmission condition.  Both carry
    # O(1/d) multiples of V_t and u_ff that cancel in the difference, so the
    # row keeps O(1) coefficients and interpolation errors are not amplified.
    uhat = line.to_centres(VExpr.dof(ug))
    trans_c = (line.to_centres(blk.u_dy_at_trace("u_gff", +1, allc)) * mu
               - uhat * cf.A4 + Vt * cf.A6)
    if beta.xx or beta.xy:
        trans_c = trans_c - (uhat * beta.xx + line.to_centres(blk.v_at_faces(0)) * beta.xy) * jump
    e = (Vn * (d * mu * cf.M_nt) + Vt * (cf.B12 + d * mu * cf.M_tt)
         - line.deriv("V_t", 2) * (d * mue) + line.dP() * d - uhat * cf.A6 - trans_c)
    B.claim(iVt, "gamma_tangential")
    B.add_expr(iVt, e, d * eval_scalar(sources.F_tau, s)
               - _line_data(sources.g_tangential, s))

    # normal transmission condition -> v on the free-flow bottom line
    rows = blk.iv[cells, 0]
    e = (blk.v_dy_at_line(0, +1, cells) * mu - blk.p_at_line(0, +1, cells)
         + Vn * (mue * (l1 + l2) / d) + P - vG * (mue * l1 / d) - q * (mue * l2 / d))
    if beta.xy or beta.yy:
        e = e - (uhat * beta.xy + vG * beta.yy) * jump
    B.claim(rows, "iface_v_ff")
    B.add_expr(rows, e, _line_data(sources.g_normal, s))

    # tangential transmission condition -> u trace on the free-flow bottom line
    pinned = blk.pinned_columns(["ff"])
    y_ff = grid.geometry.y_gamma_ff
    for ib, bc in pinned.items():
        B.identity(ug[ib], bc.vector(grid.xf[ib], y_ff)[0], "iface_u_ff")
    sel = np.setdiff1d(allc, list(pinned))
    B.claim(ug[sel], "iface_u_ff")
    B.add_expr(ug[sel], trans.take(sel), _line_data(sources.g_tangential, grid.xf[sel]))

    A = B.finalize()
    sys_ = LinearSystem(A, B.rhs.copy(), dm, B.labels,
                        time.process_time() - c0, time.perf_counter() - t0)
    sys_.porous_flux = q
    return sys_


INTERFACE_LABELS_REDUCED = ("gamma_mass", "gamma_normal", "gamma_tangential",
                            "iface_v_ff", "iface_u_ff")
