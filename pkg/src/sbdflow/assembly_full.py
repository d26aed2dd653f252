"""Monolithic system for the full Stokes / Brinkman / Darcy model.

Interface frame: n = e2 (porous -> free flow), tau = e1.  On the upper
interface the normal velocity is shared, tangential velocity continuity
is built into the single trace unknown ``u_gff``, and the stress jump
T n - T_eff n = (mu / sqrt(K_tr)) beta v closes both components.  On the
lower interface the normal flux of Darcy's law feeds the pressure
stencil, the force balance closes v, and the slip condition closes u.
"""
from __future__ import annotations

import time
from dataclasses import fields

import numpy as np

from ._darcy import DarcyBlock
from ._stencil import SystemBuilder, VExpr
from ._stokes import StokesBlock
from .boundary import BoundarySpecFull, SourceFieldsFull
from .core import PhysicalParams, ValidationError, check_params
from .grid import Model, StaggeredGrid
from .solver import LinearSystem


def _bc_map(bcs):
    return {f.name: getattr(bcs, f.name) for f in fields(bcs)}


def darcy_slope(darcy: DarcyBlock, params: PhysicalParams, vflux: VExpr) -> VExpr:
    """dp/dy on the porous side of the interface given the normal flux there."""
    K = params.K_pm
    slope = vflux * (-params.mu / K.yy)
    if K.xy != 0:
        slope = slope - darcy.px_at_top() * (K.xy / K.yy)
    return slope


def _interface_rows(blk: StokesBlock, darcy: DarcyBlock, slope: VExpr):
    B, g, prm = blk.B, blk.g, blk.prm
    nx, m = blk.nx, blk.m
    mu, mue = prm.mu, prm.mu_eff
    beta, jump = prm.beta, prm.jump_coeff
    dm = blk.dm
    y_ff, y_pm = g.geometry.y_gamma_ff, g.geometry.y_gamma_pm
    allc = np.arange(nx + 1)
    cells = np.arange(nx)

    # tangential stress jump -> u on the upper interface
    ug = dm.idx("u_gff")
    pinned = blk.pinned_columns(["ff", "tr"])
    for ib, bc in pinned.items():
        B.identity(ug[ib], bc.vector(g.xf[ib], y_ff)[0], "iface_u_ff")
    sel = np.setdiff1d(allc, list(pinned))
    e = (blk.u_dy_at_trace("u_gff", +1, allc) * mu
         - blk.u_dy_at_trace("u_gff", -1, allc) * mue)
    if beta.xx or beta.xy:
        e = e - (VExpr.dof(ug, beta.xx) + blk.v_at_faces(m) * beta.xy) * jump
    B.claim(ug[sel], "iface_u_ff")
    B.add_expr(ug[sel], e.take(sel))

    # slip condition -> u on the lower interface
    ul = dm.idx("u_gpm")
    pinned = blk.pinned_columns(["tr"])
    for ib, bc in pinned.items():
        B.identity(ul[ib], bc.vector(g.xf[ib], y_pm)[0], "iface_u_pm")
    sel = np.setdiff1d(allc, list(pinned))
    e = VExpr.dof(ul) - blk.u_dy_at_trace("u_gpm", +1, allc) * prm.slip_length
    B.claim(ul[sel], "iface_u_pm")
    B.add_expr(ul[sel], e.take(sel))

    # normal stress jump -> v on the upper interface
    rows = blk.iv[cells, m]
    dn = blk.v_dy_at_line(m, -1, cells)
    if dn is None:  # single transition row: use the divergence-free trace
        dn = -blk.du_dx_trace("u_gff")
    e = (blk.v_dy_at_line(m, +1, cells) * mu - blk.p_at_line(m, +1, cells)
         - dn * mue + blk.p_at_line(m, -1, cells))
    if beta.xy or beta.yy:
        e = e - (blk.u_trace_mid("u_gff") * beta.xy + VExpr.dof(rows, beta.yy)) * jump
    B.claim(rows, "iface_v_ff")
    B.add_expr(rows, e)

    # force balance -> v on the lower interface
    rows = blk.iv[cells, 0]
    up = blk.v_dy_at_line(0, +1, cells)
    if up is None:
        up = -blk.du_dx_trace("u_gpm")
    e = darcy.trace(slope) - blk.p_at_line(0, +1, cells) + up * mue
    B.claim(rows, "iface_v_pm")
    B.add_expr(rows, e)


def assemble_full(grid: StaggeredGrid, params: PhysicalParams,
                  sources: SourceFieldsFull, bcs: BoundarySpecFull) -> LinearSystem:
    if grid.model is not Model.FULL:
        raise ValidationError("assemble_full needs a full-model grid")
    check_params(params)
    bcs.validate()
    c0, t0 = time.process_time(), time.perf_counter()
    B = SystemBuilder(grid.dofmap.n)
    bmap = _bc_map(bcs)
    blk = StokesBlock(grid, params, B, bmap, {"ff": sources.f_ff, "tr": sources.f_tr})
    blk.assemble_bulk()
    blk.assemble_sides()
    blk.assemble_top()
    darcy = DarcyBlock(grid, params, B, bmap, sources.q)
    slope = darcy_slope(darcy, params, VExpr.dof(blk.iv[:, 0]))
    darcy.assemble(slope)
    _interface_rows(blk, darcy, slope)
    A = B.finalize()
    return LinearSystem(A, B.rhs.copy(), grid.dofmap, B.labels,
                        time.process_time() - c0, time.perf_counter() - t0)


INTERFACE_LABELS_FULL = ("iface_u_ff", "iface_u_pm", "iface_v_ff", "iface_v_pm")


def interface_rows_full(system: LinearSystem):
    """The interface equations of an assembled full system as (rows, A_rows, b_rows)."""
    rows = np.concatenate([system.rows(k) for k in INTERFACE_LABELS_FULL])
    return rows, system.matrix[rows], system.rhs[rows]
