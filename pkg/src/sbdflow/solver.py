"""Sparse linear systems and the monolithic solve."""
from __future__ import annotations

import enum
import glob
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import DofMap

log = logging.getLogger(__name__)

DIRECT_THRESHOLD = 500_000


class Method(enum.Enum):
    DIRECT = "direct"
    KRYLOV = "krylov"
    AUTO = "auto"


class SolverError(RuntimeError):
    def __init__(self, msg, residual=float("nan")):
        super().__init__(msg)
        self.residual = residual


@dataclass
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    dofmap: DofMap
    labels: dict = field(default_factory=dict)
    assembly_cpu: float = 0.0
    assembly_wall: float = 0.0

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def rows(self, label: str) -> np.ndarray:
        parts = self.labels.get(label)
        return np.concatenate(parts) if parts else np.zeros(0, dtype=int)

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x - self.rhs


@dataclass
class SolveReport:
    solution: np.ndarray
    residual: float
    wall: float
    cpu: float
    method: str
    iterations: int = 0


def _pardiso():
    """Return pypardiso.spsolve if MKL can be located, else None."""
    if os.environ.get("SBDFLOW_NO_PARDISO"):
        return None
    if "PYPARDISO_MKL_RT" not in os.environ:
        for pat in ("/usr/local/lib/libmkl_rt.so*", "/usr/lib/libmkl_rt.so*"):
            hits = sorted(glob.glob(pat))
            if hits:
                os.environ["PYPARDISO_MKL_RT"] = hits[0]
                break
    try:
        import pypardiso
    except Exception:  # missing package or MKL runtime
        return None
    return pypardiso.spsolve


def _factor(A):
    """Return (solve function, tag) for a direct factorisation of A."""
    fast = _pardiso()
    if fast is not None:
        import pypardiso
        ps = pypardiso.PyPardisoSolver()
        Ac = A.tocsr()
        ps.factorize(Ac)
        return (lambda b: ps.solve(Ac, b)), "direct-pardiso"
    lu = spla.splu(A.tocsc(), permc_spec="COLAMD")
    return lu.solve, "direct-superlu"


_ILU_LADDER = ((1e-5, 20, 0.5), (1e-6, 30, 0.5), (1e-7, 50, 1.0))


def _equilibrate(A):
    """Row then column max-scaling; returns (scaled A, row scale, column scale)."""
    r = 1.0 / abs(A).max(axis=1).toarray().ravel()
    As = sp.diags(r) @ A
    c = 1.0 / abs(As).max(axis=0).toarray().ravel()
    return (As @ sp.diags(c)).tocsc(), r, c


def _krylov(A, b, tol, maxiter):
    """Restarted GMRES on the equilibrated system with an incomplete-LU preconditioner.

    The saddle-point blocks have zero diagonals, so a loose ILU can break
    down; progressively tighter drop tolerances are tried in turn.
    """
    As, r, c = _equilibrate(A)
    ilu = None
    for drop, fill, piv in _ILU_LADDER:
        try:
            ilu = spla.spilu(As, drop_tol=drop, fill_factor=fill, diag_pivot_thresh=piv,
                             permc_spec="COLAMD")
            break
        except RuntimeError as exc:
            log.info("ILU(drop=%g) failed: %s", drop, exc)
    if ilu is None:
        raise SolverError("incomplete LU preconditioner broke down at every setting")
    M = spla.LinearOperator(As.shape, ilu.solve)
    its = [0]

    def cb(_):
        its[0] += 1

    bs = r * b
    bnorm = np.linalg.norm(b) or 1.0
    y, rtol = None, tol
    # GMRES stops on the preconditioned, scaled residual; tighten and resume
    # until the residual of the original system meets the tolerance
    for _ in range(3):
        y, info = spla.gmres(As, bs, x0=y, M=M, rtol=rtol, atol=0.0, restart=200,
                             maxiter=maxiter, callback=cb, callback_type="pr_norm")
        res = np.linalg.norm(A @ (c * y) - b) / bnorm
        if info != 0 or res <= tol:
            break
        rtol = max(rtol * tol / res * 0.5, 1e-15)
    return c * y, info, its[0]


def solve(system: LinearSystem, method=Method.AUTO, tol: float = 1e-10,
          maxiter: int = 2000, threshold: int = DIRECT_THRESHOLD) -> SolveReport:
    """Solve ``system`` monolithically.

    The direct path uses PARDISO when MKL is available and SuperLU with a
    fixed COLAMD ordering otherwise.  Krylov is restarted GMRES with an
    incomplete-LU preconditioner.  The reported residual is always
    recomputed from the assembled matrix.
    """
    method = Method(method) if not isinstance(method, Method) else method
    if method is Method.AUTO:
        method = Method.DIRECT if system.n <= threshold else Method.KRYLOV
    A, b = sp.csr_matrix(system.matrix, dtype=np.float64), np.asarray(system.rhs, np.float64)
    bnorm = np.linalg.norm(b) or 1.0
    t0, c0 = time.perf_counter(), time.process_time()
    its = 0
    if method is Method.DIRECT:
        try:
            fsolve, tag = _factor(A)
        except (RuntimeError, ValueError) as exc:
            raise SolverError(f"direct factorisation failed: {exc}") from exc
        x = fsolve(b)
        # a few steps of iterative refinement recover digits lost to pivoting
        for _ in range(3):
            r = b - A @ x
            if np.linalg.norm(r) <= tol * bnorm:
                break
            x = x + fsolve(r)
    else:
        if not tol > 0:
            raise SolverError("Krylov solve needs tol > 0")
        x, info, its = _krylov(A, b, tol, maxiter)
        tag = "krylov-gmres-ilu"
        if info != 0:
            res = np.linalg.norm(A @ x - b) / bnorm
            raise SolverError(f"GMRES did not converge (info={info})", res)
    wall, cpu = time.perf_counter() - t0, time.process_time() - c0
    if not np.all(np.isfinite(x)):
        raise SolverError("solution contains non-finite values")
    res = float(np.linalg.norm(A @ x - b) / bnorm)
    if method is Method.DIRECT and res > tol:
        raise SolverError(f"direct solve residual {res:.3e} exceeds tolerance", res)
    log.info("solved n=%d with %s in %.2fs (residual %.2e)", system.n, tag, wall, res)
    return SolveReport(x, res, wall, cpu, tag, its)
