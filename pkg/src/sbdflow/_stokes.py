"""Bulk rows and outer-boundary rows of the Stokes/Brinkman block.

The block spans the transition zone (full model) and the free-flow region.
Interface rows are written by the model-specific assemblies using the
helpers here, so both models share one definition of every trace.
"""
from __future__ import annotations

import numpy as np

from ._stencil import VExpr, fd_weights
from .boundary import BC, eval_vector
from .grid import Model, StaggeredGrid


class StokesBlock:
    def __init__(self, grid: StaggeredGrid, params, builder, bcs, forces):
        self.g = grid
        self.prm = params
        self.B = builder
        self.dm = grid.dofmap
        self.bcs = bcs          # mapping "ff_left" -> BC etc.
        self.forces = forces    # mapping "ff"/"tr" -> callable
        self.nx, self.ns, self.m = grid.nx, grid.ns, grid.n_tr
        self.hx, self.hy = grid.hx, grid.hy
        self.iu = self.dm.idx("u")
        self.iv = self.dm.idx("v")
        self.ip = self.dm.idx("p")
        # vertical chain of u nodes: (kind, key, position in units of hy)
        chain = []
        if grid.model is Model.FULL:
            chain.append(("t", "u_gpm", 0.0))
            chain += [("c", j, j + 0.5) for j in range(self.m)]
            chain.append(("t", "u_gff", float(self.m)))
        else:
            chain.append(("t", "u_gff", 0.0))
        chain += [("c", j, j + 0.5) for j in range(self.m, self.ns)]
        chain.append(("t", "u_top", float(self.ns)))
        self.chain = chain
        self._pos = {(k, key): n for n, (k, key, _) in enumerate(chain)}

    # ------------------------------------------------------------ helpers
    def region(self, j: int) -> str:
        return "tr" if j < self.m else "ff"

    def visc(self, region: str) -> float:
        return self.prm.mu if region == "ff" else self.prm.mu_eff

    def line_region(self, J: int) -> str:
        return "tr" if J < self.m else "ff"

    def side_bc(self, region: str, side: str) -> BC:
        return self.bcs[f"{region}_{side}"]

    def _node_cols(self, node, icols):
        kind, key, _ = node
        if kind == "c":
            return self.iu[icols, key]
        return self.dm.idx(key)[icols]

    def _chain_expr(self, nodes, weights, icols):
        e = VExpr.dof(self._node_cols(nodes[0], icols), weights[0])
        for nd, w in zip(nodes[1:], weights[1:]):
            e = e + VExpr.dof(self._node_cols(nd, icols), w)
        return e

    def u_yy(self, j: int, icols) -> VExpr:
        k = self._pos[("c", j)]
        ch = self.chain
        lo, hi = ch[k - 1], ch[k + 1]
        if lo[0] == "c" and hi[0] == "c":
            nodes = [lo, ch[k], hi]
        elif lo[0] == "t" and hi[0] == "t":
            nodes = [lo, ch[k], hi]
        else:
            step = 1 if lo[0] == "t" else -1
            nodes = [ch[k - step], ch[k], ch[k + step]]
            if ch[k + step][0] == "c":
                nodes.append(ch[k + 2 * step])
        pos = ch[k][2]
        w = fd_weights([nd[2] - pos for nd in nodes], 2, self.hy)
        return self._chain_expr(nodes, w, icols)

    def u_dy_at_trace(self, name: str, direction: int, icols) -> VExpr:
        """du/dy at a u trace from the side ``direction`` (+1 above, -1 below)."""
        k = self._pos[("t", name)]
        nodes = [self.chain[k]]
        for s in (1, 2):
            nd = self.chain[k + direction * s]
            nodes.append(nd)
            if nd[0] == "t":
                break
        pos = self.chain[k][2]
        w = fd_weights([nd[2] - pos for nd in nodes], 1, self.hy)
        return self._chain_expr(nodes, w, icols)

    def v_dy_at_line(self, J: int, direction: int, icols):
        """One-sided dv/dy at face line J; None when fewer than 3 faces exist."""
        lo, hi = self._line_span(J, direction)
        faces = [J + direction * s for s in range(3)]
        if any(f < lo or f > hi for f in faces):
            return None
        w = fd_weights([direction * s for s in range(3)], 1, self.hy)
        e = VExpr.dof(self.iv[icols, faces[0]], w[0])
        for f, wk in zip(faces[1:], w[1:]):
            e = e + VExpr.dof(self.iv[icols, f], wk)
        return e

    def _line_span(self, J, direction):
        # faces reachable from J without crossing another interface line
        barriers = sorted({0, self.ns} | ({self.m} if self.g.model is Model.FULL else set()))
        if direction > 0:
            return J, min(b for b in barriers if b > J)
        return max(b for b in barriers if b < J), J

    def p_at_line(self, J: int, direction: int, icols) -> VExpr:
        """Pressure extrapolated to face line J from the rows on one side."""
        rows = [J, J + 1] if direction > 0 else [J - 1, J - 2]
        lo, hi = self._line_span(J, direction)
        ok = [r for r in rows if lo <= r < hi]
        if len(ok) == 2:
            return VExpr.dof(self.ip[icols, ok[0]], 1.5) + VExpr.dof(self.ip[icols, ok[1]], -0.5)
        return VExpr.dof(self.ip[icols, ok[0]])

    def u_trace_mid(self, name: str) -> VExpr:
        """Trace u averaged to the cell-centre abscissae."""
        t = self.dm.idx(name)
        return VExpr.dof(t[:-1], 0.5) + VExpr.dof(t[1:], 0.5)

    def v_at_faces(self, J: int) -> VExpr:
        """v on face line J interpolated to the u abscissae x_i, i=0..nx."""
        nx = self.nx
        cols_a = np.concatenate([[self.dm.idx("v_left")[J]], self.iv[:, J]])
        cols_b = np.concatenate([self.iv[:, J], [self.dm.idx("v_right")[J]]])
        wa = np.full(nx + 1, 0.5)
        wa[0] = 1.0
        wb = np.full(nx + 1, 0.5)
        wb[-1] = 1.0
        wb[0] = 0.0
        wa[-1] = 0.0
        return VExpr(nx + 1, [(cols_a, wa), (cols_b, wb)])

    def du_dx_trace(self, name: str) -> VExpr:
        t = self.dm.idx(name)
        return (VExpr.dof(t[1:]) - VExpr.dof(t[:-1])) / self.hx

    def force(self, region, x, y):
        return eval_vector(self.forces[region], x, y)

    # ------------------------------------------------------------ bulk rows
    def assemble_bulk(self):
        B, nx, hx, hy, mu = self.B, self.nx, self.hx, self.hy, self.prm.mu
        g = self.g
        iu, iv, ip = self.iu, self.iv, self.ip
        Ki = self.prm.K_tr.inv()
        inner = np.arange(1, nx)
        # u momentum, interior columns
        for j in range(self.ns):
            reg = self.region(j)
            nu = self.visc(reg)
            rows = iu[inner, j]
            B.claim(rows, "mom_u")
            B.add(rows, iu[inner - 1, j], -nu / hx**2)
            B.add(rows, iu[inner, j], 2 * nu / hx**2)
            B.add(rows, iu[inner + 1, j], -nu / hx**2)
            B.add_expr(rows, self.u_yy(j, inner) * (-nu))
            B.add(rows, ip[inner, j], 1.0 / hx)
            B.add(rows, ip[inner - 1, j], -1.0 / hx)
            if reg == "tr":
                B.add(rows, rows, mu * Ki.xx)
                if Ki.xy != 0:
                    for cols in (iv[inner - 1, j], iv[inner, j], iv[inner - 1, j + 1], iv[inner, j + 1]):
                        B.add(rows, cols, 0.25 * mu * Ki.xy)
            fx, _ = self.force(reg, g.xf[inner], g.yc_s[j])
            B.add_rhs(rows, fx)
        # v momentum on face lines that are not interfaces or boundaries
        cols = np.arange(nx)
        wl = fd_weights([-0.5, 0, 1, 2], 2, hx)
        for J in range(1, self.ns):
            if g.model is Model.FULL and J == self.m:
                continue
            reg = self.line_region(J)
            nu = self.visc(reg)
            rows = iv[cols, J]
            B.claim(rows, "mom_v")
            B.add(rows, iv[cols, J - 1], -nu / hy**2)
            B.add(rows, iv[cols, J], 2 * nu / hy**2)
            B.add(rows, iv[cols, J + 1], -nu / hy**2)
            mid = cols[1:-1]
            B.add(rows[1:-1], iv[mid - 1, J], -nu / hx**2)
            B.add(rows[1:-1], iv[mid, J], 2 * nu / hx**2)
            B.add(rows[1:-1], iv[mid + 1, J], -nu / hx**2)
            for r, tr_name, c0, step in ((rows[0], "v_left", 0, 1),
                                         (rows[-1], "v_right", nx - 1, -1)):
                B.add(r, self.dm.idx(tr_name)[J], -nu * wl[0])
                B.add(r, iv[c0, J], -nu * wl[1])
                B.add(r, iv[c0 + step, J], -nu * wl[2])
                B.add(r, iv[c0 + 2 * step, J], -nu * wl[3])
            B.add(rows, ip[cols, J], 1.0 / hy)
            B.add(rows, ip[cols, J - 1], -1.0 / hy)
            if reg == "tr":
                B.add(rows, rows, mu * Ki.yy)
                if Ki.xy != 0:
                    for c in (iu[cols, J - 1], iu[cols + 1, J - 1], iu[cols, J], iu[cols + 1, J]):
                        B.add(rows, c, 0.25 * mu * Ki.xy)
            _, fy = self.force(reg, g.xc, g.yf_s[J])
            B.add_rhs(rows, fy)
        # mass conservation per cell
        I, Jr = np.meshgrid(np.arange(nx), np.arange(self.ns), indexing="ij")
        rows = ip[I, Jr]
        B.claim(rows, "mass")
        B.add(rows, iu[I + 1, Jr], 1.0 / hx)
        B.add(rows, iu[I, Jr], -1.0 / hx)
        B.add(rows, iv[I, Jr + 1], 1.0 / hy)
        B.add(rows, iv[I, Jr], -1.0 / hy)

    # ------------------------------------------------------------ outer boundary
    def assemble_sides(self):
        B, nx, hx, g = self.B, self.nx, self.hx, self.g
        iu, ip = self.iu, self.ip
        wd = fd_weights([0, 1, 2], 1, hx)
        for side, ib, s in (("left", 0, -1.0), ("right", nx, 1.0)):
            xb = g.xf[ib]
            inward = 1 if ib == 0 else -1
            pcol = 0 if ib == 0 else nx - 1
            for j in range(self.ns):
                reg = self.region(j)
                bc = self.side_bc(reg, side)
                row = iu[ib, j]
                if bc.dirichlet:
                    B.identity(row, bc.vector(xb, g.yc_s[j])[0], "bc_u_side")
                    continue
                nu = self.visc(reg)
                B.claim(row, "bc_u_side")
                for k in range(3):
                    B.add(row, iu[ib + inward * k, j], s * nu * wd[k] * inward)
                B.add(row, ip[pcol, j], -1.5 * s)
                B.add(row, ip[pcol + inward, j], 0.5 * s)
                B.add_rhs(row, bc.vector(xb, g.yc_s[j])[0])
            # v side traces on every face line
            tr = self.dm.idx(f"v_{side}")
            c0 = 0 if ib == 0 else nx - 1
            wv = fd_weights([0, 0.5, 1.5], 1, hx)
            for J in range(self.ns + 1):
                bc, reg = self._side_line_bc(J, side)
                row = tr[J]
                if bc.dirichlet:
                    B.identity(row, bc.vector(xb, g.yf_s[J])[1], "bc_v_side")
                    continue
                nu = self.visc(reg)
                B.claim(row, "bc_v_side")
                B.add(row, row, s * nu * wv[0] * inward)
                B.add(row, self.iv[c0, J], s * nu * wv[1] * inward)
                B.add(row, self.iv[c0 + inward, J], s * nu * wv[2] * inward)
                B.add_rhs(row, bc.vector(xb, g.yf_s[J])[1])

    def _side_line_bc(self, J, side):
        if self.g.model is Model.FULL and J == self.m:
            ff, tr = self.side_bc("ff", side), self.side_bc("tr", side)
            if ff.dirichlet or not tr.dirichlet:
                return ff, "ff"
            return tr, "tr"
        reg = "tr" if (self.g.model is Model.FULL and J < self.m) else "ff"
        return self.side_bc(reg, side), reg

    def assemble_top(self):
        B, nx, g, mu = self.B, self.nx, self.g, self.prm.mu
        top = self.bcs["ff_top"]
        ns, hy = self.ns, self.hy
        Ly = g.geometry.Ly
        cols = np.arange(nx)
        rows = self.iv[cols, ns]
        if top.dirichlet:
            B.identity(rows, top.vector(g.xc, Ly)[1], "bc_v_top")
        else:
            B.claim(rows, "bc_v_top")
            w = fd_weights([0, -1, -2], 1, hy)
            for k in range(3):
                B.add(rows, self.iv[cols, ns - k], mu * w[k])
            B.add(rows, self.ip[cols, ns - 1], -1.5)
            B.add(rows, self.ip[cols, ns - 2], 0.5)
            B.add_rhs(rows, top.vector(g.xc, Ly)[1])
        ut = self.dm.idx("u_top")
        allc = np.arange(nx + 1)
        if top.dirichlet:
            B.identity(ut, top.vector(g.xf, Ly)[0], "bc_u_top")
            return
        pinned = []
        for ib, side in ((0, "left"), (nx, "right")):
            bc = self.side_bc("ff", side)
            if bc.dirichlet:
                B.identity(ut[ib], bc.vector(g.xf[ib], Ly)[0], "bc_u_top")
                pinned.append(ib)
        sel = np.setdiff1d(allc, pinned)
        B.claim(ut[sel], "bc_u_top")
        e = self.u_dy_at_trace("u_top", -1, sel) * mu
        B.add_expr(ut[sel], e, top.vector(g.xf[sel], Ly)[0])

    def pinned_columns(self, regions):
        """Boundary u columns where any of ``regions`` has a Dirichlet side."""
        out = {}
        for ib, side in ((0, "left"), (self.nx, "right")):
            for reg in regions:
                bc = self.side_bc(reg, side)
                if bc.dirichlet:
                    out[ib] = bc
                    break
        return out
