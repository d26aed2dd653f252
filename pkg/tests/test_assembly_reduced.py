import numpy as np
import pytest
from hypothesis import given, strategies as st

from sbdflow.assembly_reduced import (INTERFACE_LABELS_REDUCED, ReducedCoefficients,
                                      assemble_reduced, normal_closure, tangential_closure)
from sbdflow.core import ClosureProfile, PhysicalParams, SymTensor2, ValidationError
from sbdflow.grid import Model
from sbdflow.verification import (MMS_PARAMS, consistency_residuals, mms_bcs_reduced,
                                  mms_grid_reduced, mms_sources_reduced)

QUAD = ClosureProfile.named("quadratic")


def _system(n=20, params=MMS_PARAMS, profile=QUAD):
    g = mms_grid_reduced(n)
    geo = g.geometry
    bcs, ends = mms_bcs_reduced(params, geo.y_gamma_pm, geo.d)
    return g, assemble_reduced(g, params, profile,
                               mms_sources_reduced(params, profile, geo.d, geo.y_gamma_pm),
                               bcs, ends)


def test_golden_coefficients():
    cf = ReducedCoefficients.build(MMS_PARAMS, QUAD, 5e-4)
    den = 5e-4 * (0.1 * 5e-4 + 0.4)              # 2.00025e-4
    assert cf.A4 == pytest.approx(1.2002 / den, rel=1e-13)
    assert cf.A6 == pytest.approx(1.2003 / den, rel=1e-13)
    assert cf.B12 == pytest.approx(1.2006 / den, rel=1e-13)
    assert cf.Cn == pytest.approx(6000.0, rel=1e-13)
    assert (cf.M_nn, cf.M_nt, cf.M_tt) == pytest.approx((100.0, 0.0, 100.0), rel=1e-13)


def test_assembled_interface_row_entries():
    g, s = _system(20)
    A = s.matrix.tocsr()
    dm = g.dofmap
    k = 7
    iVn, iVt = dm.idx("V_n"), dm.idx("V_t")
    h, d = g.hx, 5e-4
    # the diagonal also carries the eliminated porous flux, so only neighbours are checked
    assert A[iVn[k], iVn[k + 1]] == pytest.approx(-d / h**2, rel=1e-12)
    assert A[iVn[k], iVn[k - 1]] == pytest.approx(-d / h**2, rel=1e-12)
    assert A[iVt[k], iVt[k + 1]] == pytest.approx(-d / h**2, rel=1e-12)
    row = dm.idx("P")[k]
    assert A[row, iVt[k + 1]] == pytest.approx(d / (2 * h), rel=1e-12)
    assert A[row, iVt[k - 1]] == pytest.approx(-d / (2 * h), rel=1e-12)


def test_tangential_closure_examples():
    prm = PhysicalParams(1, 0.1, 0.1, K_pm=SymTensor2.iso(1e-2), K_tr=SymTensor2.iso(1e-2))
    assert 0.1 * 0.2 + 4 * 0.1 == pytest.approx(0.42)
    v_pm, _ = tangential_closure(prm, 0.2, 1.5, 1.5)
    assert v_pm == pytest.approx(2 * 0.1 * 2 * 1.5 / 0.42)


def test_tangential_closure_is_the_quadratic_profile(rng):
    """Fit a parabola with mean V, top value u_ff and a slip condition at the bottom."""
    prm = MMS_PARAMS
    sl = prm.slip_length
    for _ in range(10):
        d, V, uf = rng.uniform(1e-3, 0.5), rng.normal(), rng.normal()
        # q(n) = a + b n + c n^2 on [0, d]
        M = np.array([[1, d / 2, d * d / 3], [1, d, d * d], [1, -sl, 0]])
        a, b, c = np.linalg.solve(M, [V, uf, 0.0])
        v_pm, dudn = tangential_closure(prm, d, V, uf)
        assert v_pm == pytest.approx(a, abs=1e-10)
        assert dudn == pytest.approx(b + 2 * c * d, rel=1e-9, abs=1e-9)


def test_quadratic_normal_closure_matches_parabola(rng):
    for _ in range(10):
        d, V, vf, vp = rng.uniform(1e-3, 1), rng.normal(), rng.normal(), rng.normal()
        M = np.array([[1, d / 2, d * d / 3], [1, d, d * d], [1, 0, 0]])
        a, b, c = np.linalg.solve(M, [V, vf, vp])
        top, bot = normal_closure(QUAD, d, V, vf, vp)
        assert top == pytest.approx(b + 2 * c * d, rel=1e-9, abs=1e-9)
        assert bot == pytest.approx(b, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("name", ["linear", "piecewise_linear", "quadratic"])
def test_uniform_flow_has_no_normal_gradient(name):
    assert normal_closure(ClosureProfile.named(name), 0.3, 0.7, 0.7, 0.7) == pytest.approx((0, 0))


@given(st.sampled_from(["linear", "piecewise_linear", "quadratic"]),
       st.floats(1e-4, 1.0), st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_normal_closure_antisymmetry(name, d, V, vf, vp):
    prof = ClosureProfile.named(name)
    a_ff, a_pm = normal_closure(prof, d, V, vf, vp)
    # reflecting n -> d - n swaps the end values and flips the derivative sign
    b_ff, b_pm = normal_closure(prof, d, V, vp, vf)
    assert b_ff == pytest.approx(-a_pm, abs=1e-9 / d)
    assert b_pm == pytest.approx(-a_ff, abs=1e-9 / d)


def test_isotropic_cross_coupling_vanishes():
    g, s = _system(20)
    A = s.matrix.tocsr()
    iVn, iVt = g.dofmap.idx("V_n"), g.dofmap.idx("V_t")
    assert A[iVn][:, iVt].nnz == 0 and A[iVt][:, iVn].nnz == 0
    prm = PhysicalParams(1, 1, 0.1, K_tr=SymTensor2(1e-2, 3e-3, 1e-2))
    _, s2 = _system(20, prm)
    A2 = s2.matrix.tocsr()
    assert A2[iVn][:, iVt].nnz > 0 and A2[iVt][:, iVn].nnz > 0


def test_every_row_labelled_once():
    _, s = _system(20)
    rows = np.concatenate([s.rows(k) for k in s.labels])
    assert sorted(rows) == list(range(s.n))
    assert all(len(s.rows(k)) for k in INTERFACE_LABELS_REDUCED)


def test_assembly_bit_identical():
    _, a = _system(20)
    _, b = _system(20)
    assert (a.matrix != b.matrix).nnz == 0 and np.array_equal(a.rhs, b.rhs)


def test_consistency_second_order():
    _, norms, rates, _ = consistency_residuals(Model.REDUCED, [20, 40, 80])
    assert min(rates) >= 2.0, (norms, rates)


def test_requires_reduced_grid():
    from sbdflow.verification import mms_grid_full
    g = mms_grid_full(20)
    bcs, ends = mms_bcs_reduced(MMS_PARAMS, 0.5, 5e-4)
    with pytest.raises(ValidationError):
        assemble_reduced(g, MMS_PARAMS, QUAD, mms_sources_reduced(MMS_PARAMS, QUAD, 5e-4),
                         bcs, ends)


def test_nonpositive_d_rejected():
    with pytest.raises(ValidationError, match="d must be positive"):
        ReducedCoefficients.build(MMS_PARAMS, QUAD, 0.0)
