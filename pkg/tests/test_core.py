import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sbdflow.core import (ClosureProfile, PhysicalParams, ProfileKind, SymTensor2, ValidationError,
                          check_params, closure_params, m_projection, validate_params, NORMAL,
                          TANGENT, PROFILES)


def spd_tensors():
    a = st.floats(0.1, 10.0)
    return st.tuples(a, st.floats(-0.9, 0.9), a).map(
        lambda t: SymTensor2(t[0], t[1] * math.sqrt(t[0] * t[2]), t[2]))


def unit_vectors():
    return st.floats(0, 2 * math.pi).map(lambda t: (math.cos(t), math.sin(t)))


class TestClosureParams:
    def test_table_values(self):
        assert closure_params("linear") == (2.0, 0.0)
        assert closure_params("piecewise_linear") == (3.0, 1.0)
        assert closure_params(ProfileKind.QUADRATIC) == (4.0, 2.0)

    def test_custom_accepts_valid_pair(self):
        assert closure_params("custom", 5, 1.5) == (5.0, 1.5)
        p = ClosureProfile.custom(5, 1.5)
        assert (p.lambda1, p.lambda2, p.name) == (5.0, 1.5, "custom")

    @pytest.mark.parametrize("l1,l2,msg", [(1, 1, "lambda1 must exceed lambda2"),
                                           (1, 2, "lambda1 must exceed lambda2"),
                                           (1, -0.5, "lambda2 must be non-negative")])
    def test_custom_rejects(self, l1, l2, msg):
        with pytest.raises(ValidationError) as e:
            closure_params("custom", l1, l2)
        assert msg in e.value.errors

    def test_custom_needs_both(self):
        with pytest.raises(ValidationError):
            closure_params("custom", 3.0)

    def test_named_profiles_are_ordered(self):
        for p in PROFILES:
            assert p.lambda1 > p.lambda2 >= 0


class TestTensors:
    def test_m_projection_examples(self):
        K = SymTensor2.iso(1e-2)
        assert m_projection(K, NORMAL, NORMAL) == pytest.approx(100.0)
        assert m_projection(K, NORMAL, TANGENT) == 0.0
        assert m_projection(SymTensor2(2, 1, 2), (1, 0), (0, 1)) == pytest.approx(-1 / 3)

    def test_singular_projection_rejected(self):
        with pytest.raises(ValidationError):
            m_projection(SymTensor2(1, 1, 1), (1, 0), (0, 1))

    @given(spd_tensors(), unit_vectors(), unit_vectors())
    def test_projection_symmetric_and_positive(self, K, a, b):
        assert m_projection(K, a, b) == pytest.approx(m_projection(K, b, a), rel=1e-12, abs=1e-12)
        assert m_projection(K, a, a) > 0

    @given(spd_tensors())
    def test_inverse(self, K):
        prod = K.as_array() @ K.inv().as_array()
        assert np.allclose(prod, np.eye(2), atol=1e-12)

    def test_inf_norm_and_refs(self):
        p = PhysicalParams(1, 1, 1, K_tr=SymTensor2(2, -1, 1), K_pm=SymTensor2(3, 1, 5))
        assert p.K_tr_ref == 3.0
        assert p.K_pm_ref == 3.0          # tau K tau with tau = e1

    def test_jump_and_slip(self):
        p = PhysicalParams(2.0, 1.0, 0.1, beta=SymTensor2.iso(1), K_tr=SymTensor2.iso(1e-2),
                           K_pm=SymTensor2.iso(1e-2))
        assert p.jump_coeff == pytest.approx(20.0)   # mu / sqrt(K_tr) = 10 mu
        assert p.slip_length == pytest.approx(1.0)

    def test_psd_boundary_cases(self):
        assert SymTensor2(0, 0, 0).is_psd()
        assert SymTensor2(1, 1, 1).is_psd()
        assert not SymTensor2(1, 1, 1).is_spd()


class TestValidation:
    def test_mms_parameters_ok(self, mms_params):
        assert validate_params(mms_params) == []

    def test_k_tr_not_spd(self, mms_params):
        p = PhysicalParams(1, 1, 0.1, K_tr=SymTensor2(1, 2, 1))
        assert validate_params(p) == ["K_tr not SPD"]

    def test_beta_not_psd(self):
        p = PhysicalParams(1, 1, 0.1, beta=SymTensor2(1, 0, -1))
        assert validate_params(p) == ["beta not PSD"]

    def test_reports_every_violation(self):
        p = PhysicalParams(-1, 0, 0.1, beta=SymTensor2(1, 0, -1), K_pm=SymTensor2(-1, 0, 1))
        errs = validate_params(p)
        assert set(errs) == {"mu must be positive", "mu_eff must be positive",
                             "K_pm not SPD", "beta not PSD"}
        with pytest.raises(ValidationError) as e:
            check_params(p)
        assert len(e.value.errors) == 4
