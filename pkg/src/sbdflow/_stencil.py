"""Finite-difference weights and vectorised linear expressions.

Boundary and interface equations are built as ``VExpr`` objects: a batch of
``n`` affine expressions in the global unknowns, one per grid column (or
row).  They are added straight into the COO triplets of the system.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.sparse as sp


@lru_cache(maxsize=None)
def _unit_weights(nodes: tuple, kinds: str, order: int) -> tuple:
    # nodes in units of h, centred at the evaluation point
    m = len(nodes)
    A = np.zeros((m, m))
    for k, (t, kind) in enumerate(zip(nodes, kinds)):
        for p in range(m):
            if kind == "v":
                A[p, k] = t ** p
            else:
                A[p, k] = p * t ** (p - 1) if p else 0.0
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return tuple(np.linalg.solve(A, rhs))


def fd_weights(nodes, order: int, h: float, kinds: str | None = None) -> np.ndarray:
    """Weights for the ``order``-th derivative at 0 from data at ``nodes``.

    ``nodes`` are offsets in units of ``h``.  ``kinds`` marks each datum as a
    value ('v') or a first derivative ('d'); the stencil is exact for
    polynomials of degree ``len(nodes) - 1``.
    """
    nodes = tuple(float(t) for t in nodes)
    kinds = kinds or "v" * len(nodes)
    w = np.array(_unit_weights(nodes, kinds, order))
    scale = np.array([h ** -order if k == "v" else h ** (1 - order) for k in kinds])
    return w * scale


class VExpr:
    """``n`` affine expressions sum_k coef_k * x[cols_k] + const."""

    __slots__ = ("n", "terms", "const")

    def __init__(self, n: int, terms=None, const=None):
        self.n = n
        self.terms = list(terms or [])
        self.const = np.zeros(n) if const is None else np.broadcast_to(
            np.asarray(const, dtype=float), (n,)).copy()

    @classmethod
    def dof(cls, cols, coef=1.0):
        cols = np.asarray(cols)
        return cls(len(cols), [(cols, np.broadcast_to(np.asarray(coef, float), cols.shape))])

    @classmethod
    def value(cls, vals, n=None):
        vals = np.asarray(vals, dtype=float)
        n = n if n is not None else vals.size
        return cls(n, const=vals)

    def __add__(self, other):
        if not isinstance(other, VExpr):
            return VExpr(self.n, self.terms, self.const + other)
        return VExpr(self.n, self.terms + other.terms, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, s):
        s = np.asarray(s, dtype=float)
        return VExpr(self.n, [(c, w * s) for c, w in self.terms], self.const * s)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / np.asarray(s, dtype=float))

    def take(self, sel):
        sel = np.asarray(sel)
        terms = [(c[sel], np.broadcast_to(w, c.shape)[sel]) for c, w in self.terms]
        return VExpr(len(np.arange(self.n)[sel]), terms, self.const[sel])

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        out = self.const.copy()
        for c, w in self.terms:
            out += w * x[c]
        return out


def combine(weights, exprs) -> VExpr:
    out = exprs[0] * weights[0]
    for w, e in zip(weights[1:], exprs[1:]):
        out = out + e * w
    return out


def concat(exprs) -> VExpr:
    """Stack expressions row-wise."""
    n = sum(e.n for e in exprs)
    terms = []
    off = 0
    for e in exprs:
        for c, w in e.terms:
            cols = np.full(n, -1, dtype=np.int64)
            coef = np.zeros(n)
            cols[off:off + e.n] = c
            coef[off:off + e.n] = np.broadcast_to(w, c.shape)
            terms.append((cols, coef))
        off += e.n
    const = np.concatenate([e.const for e in exprs])
    return VExpr(n, terms, const)


class SystemBuilder:
    """Accumulates COO triplets; every unknown owns exactly one equation."""

    def __init__(self, n: int):
        self.n = n
        self._r, self._c, self._v = [], [], []
        self.rhs = np.zeros(n)
        self._owner = np.full(n, "", dtype=object)
        self.labels = {}

    def claim(self, rows, label: str):
        rows = np.asarray(rows).ravel()
        taken = self._owner[rows] != ""
        if taken.any():
            k = rows[taken][0]
            raise RuntimeError(f"row {k} claimed twice ({self._owner[k]}, {label})")
        self._owner[rows] = label
        self.labels.setdefault(label, []).append(rows)

    def add(self, rows, cols, vals):
        rows, cols, vals = np.broadcast_arrays(np.asarray(rows), np.asarray(cols),
                                               np.asarray(vals, dtype=float))
        keep = (cols >= 0) & (vals != 0)
        self._r.append(rows[keep].ravel())
        self._c.append(cols[keep].ravel())
        self._v.append(vals[keep].ravel())

    def add_rhs(self, rows, vals):
        np.add.at(self.rhs, np.asarray(rows).ravel(),
                  np.broadcast_to(np.asarray(vals, float), np.shape(rows)).ravel())

    def add_expr(self, rows, expr: VExpr, rhs=0.0):
        """Impose ``expr == rhs`` in ``rows``."""
        rows = np.asarray(rows)
        for c, w in expr.terms:
            self.add(rows, c, w)
        self.add_rhs(rows, np.asarray(rhs, float) - expr.const)

    def identity(self, rows, vals, label):
        self.claim(rows, label)
        self.add(rows, rows, 1.0)
        self.add_rhs(rows, vals)

    def rows_with(self, label):
        return np.concatenate(self.labels.get(label, [np.zeros(0, int)]))

    def finalize(self) -> sp.csr_matrix:
        missing = np.flatnonzero(self._owner == "")
        if missing.size:
            raise RuntimeError(f"{missing.size} unknowns have no equation (first {missing[0]})")
        r = np.concatenate(self._r) if self._r else np.zeros(0, int)
        c = np.concatenate(self._c) if self._c else np.zeros(0, int)
        v = np.concatenate(self._v) if self._v else np.zeros(0)
        A = sp.csr_matrix((v, (r, c)), shape=(self.n, self.n))
        A.sum_duplicates()
        A.eliminate_zeros()
        return A
