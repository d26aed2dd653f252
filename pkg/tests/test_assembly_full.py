import numpy as np
import pytest

from sbdflow.assembly_full import INTERFACE_LABELS_FULL, assemble_full, interface_rows_full
from sbdflow.boundary import BC, BoundarySpecFull, SourceFieldsFull, zero_scalar, zero_vector
from sbdflow.core import PhysicalParams, SymTensor2, ValidationError
from sbdflow.grid import GeometryConfig, Model, build_grid
from sbdflow.solver import Method, solve
from sbdflow.verification import (MMS_PARAMS, ExactSolutionFull, consistency_residuals,
                                  exact_vector, mms_bcs_full, mms_grid_full, mms_sources_full)

SMALL = GeometryConfig(1.0, 1.2, 0.6, 0.8, 4, 6)     # 3 porous, 1 transition, 2 free-flow rows


def _walls():
    w = BC.no_slip()
    p0 = BC.pressure(0.0)
    return BoundarySpecFull(w, w, w, w, w, p0, p0, p0)


def _zero_sources():
    return SourceFieldsFull(zero_vector, zero_vector, zero_scalar)


def _mms(grid, params=MMS_PARAMS, variant="dirichlet"):
    y0 = grid.geometry.y_gamma_pm
    return assemble_full(grid, params, mms_sources_full(params, y0), mms_bcs_full(params, y0, variant))


def test_zero_data_gives_zero_velocity():
    g = build_grid(GeometryConfig(1, 2, 0.9, 1.1, 10, 20))
    s = assemble_full(g, MMS_PARAMS, _zero_sources(), _walls())
    x = solve(s, Method.DIRECT).solution
    f = g.dofmap.split(x)
    assert max(np.max(np.abs(f["u"])), np.max(np.abs(f["v"]))) <= 1e-12


def test_every_row_labelled_once():
    g = build_grid(SMALL)
    s = _mms(g)
    rows = np.concatenate([s.rows(k) for k in s.labels])
    assert sorted(rows) == list(range(s.n))


def test_gradient_is_negative_divergence_transpose():
    g = build_grid(SMALL)
    s = _mms(g)
    A = s.matrix.tocsr()
    mom = np.concatenate([s.rows("mom_u"), s.rows("mom_v")])
    pc = g.dofmap.idx("p").ravel(order="F")
    G = A[mom][:, pc].toarray()
    D = A[pc][:, mom].toarray()
    assert np.abs(G).max() > 0
    assert np.array_equal(G, -D.T)


def test_isotropic_drag_does_not_couple_components():
    g = build_grid(SMALL)
    vcols = g.dofmap.idx("v").ravel()
    iso = _mms(g).matrix.tocsr()
    rows = _mms(g).rows("mom_u")
    assert iso[rows][:, vcols].nnz == 0
    aniso = PhysicalParams(1, 1, 0.1, K_tr=SymTensor2(1e-2, 4e-3, 1e-2))
    A = assemble_full(g, aniso, mms_sources_full(aniso, 0.6), mms_bcs_full(aniso, 0.6)).matrix
    assert A.tocsr()[rows][:, vcols].nnz > 0


def test_friction_only_touches_upper_interface_rows():
    g = build_grid(SMALL)
    a = _mms(g).matrix.tocsr()
    prm = PhysicalParams(1, 1, 0.1, beta=SymTensor2(1, 0.2, 0.5))
    s = _mms(g, prm)
    changed = np.unique((s.matrix.tocsr() - a).tocoo().row)
    allowed = np.concatenate([s.rows("iface_u_ff"), s.rows("iface_v_ff")])
    assert changed.size and np.all(np.isin(changed, allowed))


def test_assembly_bit_identical():
    g = mms_grid_full(20)
    a, b = _mms(g), _mms(g)
    assert (a.matrix != b.matrix).nnz == 0 and np.array_equal(a.rhs, b.rhs)


def test_interface_rows_helper():
    s = _mms(build_grid(SMALL))
    rows, A, b = interface_rows_full(s)
    assert len(rows) == sum(len(s.rows(k)) for k in INTERFACE_LABELS_FULL)
    assert A.shape == (len(rows), s.n) and b.shape == (len(rows),)


@pytest.mark.parametrize("variant", ["dirichlet", "mixed"])
def test_divergence_free_after_solve(variant):
    g = mms_grid_full(20)
    x = solve(_mms(g, variant=variant), Method.DIRECT).solution
    f = g.dofmap.split(x)
    div = np.diff(f["u"], axis=0) / g.hx + np.diff(f["v"], axis=1) / g.hy
    assert np.max(np.abs(div)) <= 1e-9


def test_interface_residual_second_order():
    _, _, _, out = consistency_residuals(Model.FULL, [20, 40, 80])
    norms = [max(np.max(np.abs(r[s.rows(k)])) for k in INTERFACE_LABELS_FULL)
             for _, _, s, r in out]
    assert norms[0] / norms[1] > 3.5 and norms[1] / norms[2] > 3.5


def test_darcy_anisotropic_consistency():
    """Interior porous rows with a full K_pm tensor are second-order consistent."""
    prm = PhysicalParams(1, 1, 0.1, K_pm=SymTensor2(2e-2, 5e-3, 1e-2))
    norms = []
    for n in (20, 40, 80):
        g = mms_grid_full(n)
        s = _mms(g, prm)
        r = s.residual(exact_vector(g, ExactSolutionFull(0.9)))
        ip = g.dofmap.idx("p_pm")[1:-1, 1:-1].ravel()
        norms.append(np.max(np.abs(r[ip])))
    assert norms[0] / norms[1] > 3.5 and norms[1] / norms[2] > 3.5


def test_requires_full_grid():
    g = build_grid(GeometryConfig(1, 1.25, 0.5, 0.75, 4, 8), Model.REDUCED)
    with pytest.raises(ValidationError):
        assemble_full(g, MMS_PARAMS, _zero_sources(), _walls())


def test_pressure_level_must_be_pinned():
    w, f = BC.no_slip(), BC.flux(0.0)
    with pytest.raises(ValidationError, match="pressure level undetermined"):
        BoundarySpecFull(w, w, w, w, w, f, f, f).validate()


def test_disallowed_kind():
    w = BC.no_slip()
    with pytest.raises(ValidationError, match="not allowed"):
        BoundarySpecFull(w, w, w, w, w, w, BC.pressure(0), BC.pressure(0)).validate()
