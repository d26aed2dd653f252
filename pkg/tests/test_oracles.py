"""Hard-coded manufactured data checked against independent numerical oracles."""
import numpy as np
import pytest

from sbdflow.core import PhysicalParams, SymTensor2
from sbdflow.verification import (ExactSolutionFull, ExactSolutionReduced, MMS_PARAMS, fd_first,
                                  interface_condition_residuals, mms_sources_full,
                                  mms_sources_reduced, oracle_average, oracle_sources_full)

Y0 = 0.9


@pytest.fixture
def points(rng):
    return rng.uniform(0, 1, 20), rng.uniform(0.9, 1.1, 20)


ANISO = PhysicalParams(1.3, 0.7, 0.2, K_tr=SymTensor2(2e-2, 5e-3, 1e-2),
                       K_pm=SymTensor2(3e-2, -1e-2, 2e-2))


@pytest.mark.parametrize("params", [MMS_PARAMS, ANISO], ids=["isotropic", "anisotropic"])
def test_full_sources_match_fd_oracle(params, points):
    x, y = points
    src = mms_sources_full(params, Y0)
    o_ff, o_tr, o_q = oracle_sources_full(params, Y0, x, y)
    for a, b in zip(src.f_ff(x, y), o_ff):
        assert np.max(np.abs(a - b)) <= 1e-8
    for a, b in zip(src.f_tr(x, y), o_tr):
        assert np.max(np.abs(a - b)) <= 1e-8
    assert np.max(np.abs(src.q(x, y) - o_q)) <= 1e-8


def test_source_examples():
    src = mms_sources_full(MMS_PARAMS, Y0)
    assert src.f_ff(np.array(0.0), np.array(Y0))[0] == pytest.approx(1.0)
    x, y = np.array([0.3, 0.8]), np.array([0.2, 0.7])
    # the Darcy source is -(y - y0) sin x for K = 1e-2 I, mu = 1
    assert np.allclose(src.q(x, y), -(y - Y0) * np.sin(x), atol=1e-15)


@pytest.mark.parametrize("params", [MMS_PARAMS, ANISO], ids=["isotropic", "anisotropic"])
def test_averaged_sources_match_quadrature(params, rng):
    d = 5e-4
    s = rng.uniform(0, 1, 20)
    full = mms_sources_full(params, 0.5)
    red = mms_sources_reduced(params, None, d, 0.5)
    Fn = oracle_average(lambda s_, y_: full.f_tr(s_, y_)[1], s, 0.5, d)
    Ft = oracle_average(lambda s_, y_: full.f_tr(s_, y_)[0], s, 0.5, d)
    assert np.max(np.abs(red.F_n(s) - Fn)) <= 1e-10
    assert np.max(np.abs(red.F_tau(s) - Ft)) <= 1e-10


def test_averaged_sources_vanish_for_zero_data():
    from sbdflow.boundary import zero_line
    assert np.all(zero_line(np.linspace(0, 1, 5)) == 0)


def test_averaged_sources_small_d_limit(rng):
    s = rng.uniform(0, 1, 5)
    full = mms_sources_full(MMS_PARAMS, 0.5)
    red = mms_sources_reduced(MMS_PARAMS, None, 1e-7, 0.5)
    fx, fy = full.f_tr(s, 0.5 + 0 * s)
    assert np.allclose(red.F_n(s), fy, atol=1e-6)
    assert np.allclose(red.F_tau(s), fx, atol=1e-6)


def test_reduced_exact_fields_are_averages(rng):
    d = 0.2
    ex = ExactSolutionReduced(Y0, d)
    b = ex.bulk
    s = rng.uniform(0, 1, 20)
    assert np.max(np.abs(ex.U(s) - oracle_average(b.u, s, Y0, d))) <= 1e-10
    assert np.max(np.abs(ex.V(s) - oracle_average(b.v, s, Y0, d))) <= 1e-10
    assert np.max(np.abs(ex.P(s) - oracle_average(b.p, s, Y0, d))) <= 1e-10


def test_exact_fields_divergence_free(points):
    x, y = points
    ex = ExactSolutionFull(Y0)
    ux, _ = ex.grad_u(x, y)
    _, vy = ex.grad_v(x, y)
    assert np.max(np.abs(ux + vy)) <= 1e-12
    fx, _ = fd_first(ex.u, x, y)
    _, fy = fd_first(ex.v, x, y)
    assert np.max(np.abs(fx + fy)) <= 1e-9


def test_closed_form_gradients_match_fd(points):
    x, y = points
    ex = ExactSolutionFull(Y0)
    for f, g in ((ex.u, ex.grad_u), (ex.v, ex.grad_v), (ex.p_pm, ex.grad_p_pm)):
        for a, b in zip(fd_first(f, x, y), g(x, y)):
            assert np.max(np.abs(a - b)) <= 1e-8


def test_interface_conditions_hold_exactly(rng):
    x = rng.uniform(0, 1, 20)
    res = interface_condition_residuals(MMS_PARAMS, 0.9, 1.1, x)
    assert set(res) == {"continuity", "stress_jump_x", "stress_jump_y", "normal_flux",
                        "force_balance", "slip"}
    for name, r in res.items():
        assert np.max(np.abs(r)) <= 1e-10, name


def test_interface_conditions_detect_wrong_parameters(rng):
    x = rng.uniform(0.1, 1, 20)
    bad = PhysicalParams(1.0, 1.0, 0.2)      # slip length 0.5 instead of 1
    assert np.max(np.abs(interface_condition_residuals(bad, 0.9, 1.1, x)["slip"])) > 1e-3


def test_consistent_reduced_data_is_order_d(rng):
    """The transmission data that make the averages an exact reduced solution are O(d)."""
    s = rng.uniform(0, 1, 20)
    sizes = []
    for d in (1e-2, 5e-3):
        red = mms_sources_reduced(MMS_PARAMS, None, d, 0.5, consistent=True)
        sizes.append(max(np.max(np.abs(red.g_normal(s))), np.max(np.abs(red.g_pressure(s)))))
    assert sizes[0] / sizes[1] == pytest.approx(2.0, rel=0.1)
