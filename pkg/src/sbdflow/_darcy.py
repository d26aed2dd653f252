"""Primal Darcy rows: -div((K/mu) grad p) = q at porous cell centres.

The operator is discretised in finite-difference form
-(Kxx p_xx + 2 Kxy p_xy + Kyy p_yy) / mu.  Boundary data enter the
second-derivative stencils as ghost data: a pressure value or a normal
derivative half a cell outside the last centre.  The top boundary (the
interface with the Stokes block) receives its normal derivative from the
caller as an expression in the global unknowns.
"""
from __future__ import annotations

import numpy as np

from ._stencil import VExpr, fd_weights


def first_diff(n: int, h: float):
    """Second-order d/dx at n cell centres using cells only.

    Returns (index offsets, weights), both shaped (3, n).
    """
    idx = np.empty((3, n), dtype=int)
    w = np.empty((3, n))
    k = np.arange(n)
    idx[:] = k - 1, k, k + 1
    w[:, :] = np.array([-0.5, 0.0, 0.5])[:, None] / h
    idx[:, 0] = 0, 1, 2
    w[:, 0] = np.array([-1.5, 2.0, -0.5]) / h
    idx[:, -1] = n - 1, n - 2, n - 3
    w[:, -1] = np.array([1.5, -2.0, 0.5]) / h
    return idx, w


class DarcyBlock:
    def __init__(self, grid, params, builder, bcs, q):
        self.g = grid
        self.prm = params
        self.B = builder
        self.bcs = bcs
        self.q = q
        self.ip = grid.dofmap.idx("p_pm")
        self.nx, self.ny = grid.nx, grid.n_pm
        self.K = params.K_pm
        self.hx, self.hy = grid.hx, grid.hy

    def dx(self, j) -> VExpr:
        """dp/dx along cell row j (expression per column)."""
        off, w = first_diff(self.nx, self.hx)
        return VExpr(self.nx, [(self.ip[off[k], j], w[k]) for k in range(3)])

    def dy(self, i) -> VExpr:
        off, w = first_diff(self.ny, self.hy)
        return VExpr(self.ny, [(self.ip[i, off[k]], w[k]) for k in range(3)])

    def px_at_top(self) -> VExpr:
        return self.dx(self.ny - 1) * 1.5 - self.dx(self.ny - 2) * 0.5

    def trace_weights(self):
        """Weights (w_slope, w_a, w_b) of the interface pressure trace."""
        return fd_weights([0, -0.5, -1.5], 0, self.hy, kinds="dvv")

    def trace(self, slope: VExpr) -> VExpr:
        wg, wa, wb = self.trace_weights()
        top = self.ny - 1
        return slope * wg + VExpr.dof(self.ip[:, top], wa) + VExpr.dof(self.ip[:, top - 1], wb)

    def assemble(self, top_slope: VExpr):
        B, K, mu, g = self.B, self.K, self.prm.mu, self.g
        nx, ny, hx, hy = self.nx, self.ny, self.hx, self.hy
        ip = self.ip
        I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        B.claim(ip, "darcy")
        X, Y = np.meshgrid(g.xc, g.yc_pm, indexing="ij")
        B.add_rhs(ip, np.broadcast_to(self.q(X, Y), X.shape))
        cx, cy = -K.xx / mu, -K.yy / mu
        # x direction, interior columns
        mid = slice(1, nx - 1)
        for d, w in ((-1, 1.0), (0, -2.0), (1, 1.0)):
            B.add(ip[mid], ip[I[mid] + d, J[mid]], cx * w / hx**2)
        for i, side, s in ((0, "left", -1.0), (nx - 1, "right", 1.0)):
            inward = 1 if i == 0 else -1
            bc = self.bcs[f"pm_{side}"]
            xb = 0.0 if i == 0 else g.geometry.Lx
            kinds = "vvvv" if bc.dirichlet else "dvvv"
            w = fd_weights([-0.5, 0, 1, 2], 2, hx, kinds)
            rows = ip[i]
            for k in range(3):
                B.add(rows, ip[i + inward * k], cx * w[k + 1])
            data = bc.scalar(xb, g.yc_pm)
            if bc.dirichlet:
                datum = VExpr.value(data)
            else:
                # outward flux s*v_x = g_n, v_x = -(Kxx p_x + Kxy p_y)/mu
                datum = VExpr.value(-s * mu * data / K.xx)
                if K.xy != 0:
                    py = self.dy(i) * 1.5 - self.dy(i + inward) * 0.5
                    datum = datum - py * (K.xy / K.xx)
                datum = datum * inward  # derivative along the inward stencil axis
            B.add_expr(rows, datum * (cx * w[0]))
        # y direction
        mid = slice(1, ny - 1)
        for d, w in ((-1, 1.0), (0, -2.0), (1, 1.0)):
            B.add(ip[:, mid], ip[I[:, mid], J[:, mid] + d], cy * w / hy**2)
        bot = self.bcs["pm_bottom"]
        kinds = "vvvv" if bot.dirichlet else "dvvv"
        w = fd_weights([-0.5, 0, 1, 2], 2, hy, kinds)
        for k in range(3):
            B.add(ip[:, 0], ip[:, k], cy * w[k + 1])
        data = bot.scalar(g.xc, 0.0)
        if bot.dirichlet:
            datum = VExpr.value(data)
        else:
            datum = VExpr.value(mu * data / K.yy)
            if K.xy != 0:
                px = self.dx(0) * 1.5 - self.dx(1) * 0.5
                datum = datum - px * (K.xy / K.yy)
        B.add_expr(ip[:, 0], datum * (cy * w[0]))
        w = fd_weights([0.5, 0, -1, -2], 2, hy, "dvvv")
        top = ny - 1
        for k in range(3):
            B.add(ip[:, top], ip[:, top - k], cy * w[k + 1])
        B.add_expr(ip[:, top], top_slope * (cy * w[0]))
        # mixed derivative
        if K.xy != 0:
            offx, wx = first_diff(nx, hx)
            offy, wy = first_diff(ny, hy)
            c = -2 * K.xy / mu
            for a in range(3):
                for b in range(3):
                    B.add(ip, ip[offx[a][:, None], offy[b][None, :]],
                          c * wx[a][:, None] * wy[b][None, :])
