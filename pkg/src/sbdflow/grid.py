"""Uniform MAC grids over the layered domain and the global unknown map.

Layout (bottom to top): porous medium [0, y_pm], transition zone
[y_pm, y_ff] (full model only), free flow [y_ff, Ly].  The Stokes-type
block (transition + free flow in the full model, free flow alone in the
reduced one) carries u on vertical faces, v on horizontal faces and p at
centers.  The porous block carries p only.

Besides bulk unknowns, each Stokes block owns explicit *trace* unknowns:
u on its top boundary and on every horizontal interface line, and v on the
left and right boundaries at every face line.  Boundary and interface
conditions are written as equations for those traces, which keeps every
stencil in the interior a plain second-order difference.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import ValidationError


class Model(enum.Enum):
    FULL = "full"
    REDUCED = "reduced"


@dataclass(frozen=True)
class GeometryConfig:
    """Domain extents, transition-zone position and cell counts.

    For the full model ``hy = Ly / ny``.  For the reduced model the strip
    between the interfaces holds no cells, so ``ny`` counts bulk rows only
    and ``hy = (Ly - d) / ny``.
    """

    Lx: float
    Ly: float
    y_gamma_pm: float
    y_gamma_ff: float
    nx: int
    ny: int

    @property
    def d(self) -> float:
        return self.y_gamma_ff - self.y_gamma_pm

    def errors(self) -> list[str]:
        errs = []
        if not self.Lx > 0:
            errs.append("Lx must be positive")
        if not self.y_gamma_ff > self.y_gamma_pm:
            errs.append("d must be positive")
        if not 0 < self.y_gamma_pm:
            errs.append("y_gamma_pm must be positive")
        if not self.y_gamma_ff < self.Ly:
            errs.append("y_gamma_ff must lie below Ly")
        for name in ("nx", "ny"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and v > 0):
                errs.append(f"{name} must be a positive integer")
        return errs


def _rows(length: float, h: float, what: str) -> int:
    r = length / h
    n = int(round(r))
    if n < 1 or abs(r - n) > 1e-12 * max(1.0, r):
        raise ValidationError(
            f"{what} is not conforming: {length!r} is not a multiple of hy={h!r}")
    return n


class DofMap:
    """Contiguous numbering of named unknown blocks.

    Each block is an array of unknowns numbered with the first index
    fastest, so ``idx('u')[i, j]`` is the global index of u at column i,
    row j.
    """

    def __init__(self, blocks):
        self._shapes = {}
        self._offsets = {}
        n = 0
        for name, shape in blocks:
            shape = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
            if name in self._shapes:
                raise ValueError(f"duplicate block {name}")
            self._shapes[name] = shape
            self._offsets[name] = n
            n += int(np.prod(shape))
        self.n = n
        self._cache = {}

    @property
    def names(self):
        return list(self._shapes)

    def shape(self, name):
        return self._shapes[name]

    def offset(self, name):
        return self._offsets[name]

    def size(self, name):
        return int(np.prod(self._shapes[name]))

    def idx(self, name) -> np.ndarray:
        if name not in self._cache:
            a = self._offsets[name] + np.arange(self.size(name))
            a = a.reshape(self._shapes[name], order="F")
            a.setflags(write=False)
            self._cache[name] = a
        return self._cache[name]

    def locate(self, k: int):
        """Inverse map: global index -> (block name, multi-index)."""
        for name in self._shapes:
            off = self._offsets[name]
            if off <= k < off + self.size(name):
                return name, np.unravel_index(k - off, self._shapes[name], order="F")
        raise IndexError(k)

    def split(self, x: np.ndarray) -> dict:
        return {name: x[self.idx(name)] for name in self._shapes}

    def join(self, fields: dict) -> np.ndarray:
        x = np.zeros(self.n)
        for name, val in fields.items():
            x[self.idx(name)] = val
        return x


@dataclass(frozen=True)
class StaggeredGrid:
    geometry: GeometryConfig
    model: Model
    hx: float
    hy: float
    n_pm: int
    n_tr: int
    n_ff: int

    @property
    def nx(self) -> int:
        return self.geometry.nx

    @property
    def ns(self) -> int:
        """Rows in the Stokes-type block."""
        return self.n_tr + self.n_ff

    @property
    def y_s0(self) -> float:
        g = self.geometry
        return g.y_gamma_pm if self.model is Model.FULL else g.y_gamma_ff

    @property
    def region_of_row(self) -> tuple:
        return ("pm",) * self.n_pm + ("tr",) * self.n_tr + ("ff",) * self.n_ff

    @property
    def face_gamma_pm(self) -> int:
        """Index of the face line on y_pm, counted in bulk rows from the bottom."""
        return self.n_pm

    @property
    def face_gamma_ff(self) -> int:
        return self.n_pm + self.n_tr

    # coordinates
    @cached_property
    def xc(self):
        return (np.arange(self.nx) + 0.5) * self.hx

    @cached_property
    def xf(self):
        return np.arange(self.nx + 1) * self.hx

    @cached_property
    def yc_pm(self):
        return (np.arange(self.n_pm) + 0.5) * self.hy

    @cached_property
    def yc_s(self):
        return self.y_s0 + (np.arange(self.ns) + 0.5) * self.hy

    @cached_property
    def yf_s(self):
        return self.y_s0 + np.arange(self.ns + 1) * self.hy

    @cached_property
    def dofmap(self) -> DofMap:
        nx, ns = self.nx, self.ns
        blocks = [("u", (nx + 1, ns)), ("v", (nx, ns + 1)), ("p", (nx, ns)),
                  ("p_pm", (nx, self.n_pm)), ("u_top", nx + 1), ("u_gff", nx + 1)]
        if self.model is Model.FULL:
            blocks.append(("u_gpm", nx + 1))
        blocks += [("v_left", ns + 1), ("v_right", ns + 1)]
        if self.model is Model.REDUCED:
            blocks += [("V_n", nx), ("V_t", nx), ("P", nx)]
        return DofMap(blocks)


def build_grid(config: GeometryConfig, model=Model.FULL) -> StaggeredGrid:
    model = Model(model) if not isinstance(model, Model) else model
    errs = config.errors()
    if errs:
        raise ValidationError(errs)
    g = config
    hx = g.Lx / g.nx
    if model is Model.FULL:
        hy = g.Ly / g.ny
        n_pm = _rows(g.y_gamma_pm, hy, "y_gamma_pm")
        n_tr = _rows(g.d, hy, "y_gamma_ff")
        n_ff = g.ny - n_pm - n_tr
    else:
        hy = (g.Ly - g.d) / g.ny
        n_pm = _rows(g.y_gamma_pm, hy, "y_gamma_pm")
        n_tr = 0
        n_ff = _rows(g.Ly - g.y_gamma_ff, hy, "y_gamma_ff")
    if g.nx < 3:
        raise ValidationError("nx must be at least 3")
    if n_ff < 2:
        raise ValidationError("free-flow region needs at least two cell rows")
    if n_pm < 3:
        raise ValidationError("porous region needs at least three cell rows")
    return StaggeredGrid(g, model, hx, hy, n_pm, n_tr, n_ff)


def dof_count(grid: StaggeredGrid) -> int:
    return grid.dofmap.n
