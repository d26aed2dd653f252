import numpy as np
import pytest
import scipy.sparse as sp

from sbdflow.grid import DofMap
from sbdflow.solver import LinearSystem, Method, SolverError, solve
from sbdflow.verification import MMS_PARAMS, mms_bcs_full, mms_grid_full, mms_sources_full
from sbdflow.assembly_full import assemble_full


def _system(A, b):
    A = sp.csr_matrix(A)
    return LinearSystem(A, np.asarray(b, float), DofMap([("x", A.shape[0])]))


def test_identity():
    b = np.array([3.0, -1.0, 2.5])
    rep = solve(_system(np.eye(3), b), Method.DIRECT)
    assert np.array_equal(rep.solution, b) and rep.residual == 0.0


@pytest.mark.parametrize("method", [Method.DIRECT, Method.KRYLOV])
def test_two_by_two(method):
    rep = solve(_system([[2, 1], [1, 3]], [3, 4]), method)
    assert np.allclose(rep.solution, [1, 1], atol=1e-12)
    assert rep.residual <= 1e-10


def test_singular_direct_raises():
    with pytest.raises(SolverError):
        solve(_system([[1, 1], [1, 1]], [1, 2]), Method.DIRECT)


def test_krylov_needs_positive_tol():
    with pytest.raises(SolverError):
        solve(_system(np.eye(2), [1, 1]), Method.KRYLOV, tol=0.0)


def test_krylov_nonconvergence_carries_residual():
    n = 200
    A = sp.diags([np.linspace(1, 1e6, n)], [0]) + sp.random(n, n, 0.05, random_state=1)
    with pytest.raises(SolverError) as e:
        solve(_system(A, np.ones(n)), Method.KRYLOV, tol=1e-30, maxiter=1)
    assert np.isfinite(e.value.residual)


@pytest.fixture(scope="module")
def mms_64():
    g = mms_grid_full(60)
    y0 = g.geometry.y_gamma_pm
    return assemble_full(g, MMS_PARAMS, mms_sources_full(MMS_PARAMS, y0), mms_bcs_full(MMS_PARAMS, y0))


def test_mms_direct_residual(mms_64):
    rep = solve(mms_64, Method.DIRECT)
    assert rep.residual <= 1e-10
    assert rep.residual == pytest.approx(np.linalg.norm(mms_64.residual(rep.solution))
                                         / np.linalg.norm(mms_64.rhs), rel=1e-12)


def test_direct_deterministic(mms_64):
    a = solve(mms_64, Method.DIRECT).solution
    b = solve(mms_64, Method.DIRECT).solution
    assert np.array_equal(a, b)


def test_krylov_agrees_with_direct(mms_64):
    a = solve(mms_64, Method.DIRECT).solution
    b = solve(mms_64, Method.KRYLOV, tol=1e-12)
    assert b.method.startswith("krylov") and b.residual <= 1e-12
    assert np.max(np.abs(a - b.solution)) <= 1e-8 * np.max(np.abs(a))


def test_auto_threshold(mms_64):
    assert solve(mms_64, Method.AUTO, threshold=10).method.startswith("krylov")
    assert solve(mms_64, Method.AUTO).method.startswith("direct")
