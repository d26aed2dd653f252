import math

import numpy as np
import pytest

from sbdflow.core import ValidationError
from sbdflow.grid import Model
from sbdflow.verification import (ExactSolutionFull, convergence_study, exact_vector,
                                  field_errors, l2_error, mms_grid_full, observed_orders,
                                  trapezoid_weights)


def test_l2_error_zero_and_constant():
    w = np.full((10, 10), 0.01)
    f = np.random.default_rng(0).normal(size=(10, 10))
    assert l2_error(f, f, w) == 0.0
    assert l2_error(f + 0.3, f, w) == pytest.approx(0.3)


def test_l2_error_region_mismatch():
    with pytest.raises(ValidationError, match="region mismatch"):
        l2_error(np.zeros(3), np.zeros(4), np.ones(3))


def test_norm_converges_to_continuum():
    # ||x|| on [0,1] is 1/sqrt(3)
    vals = []
    for n in (10, 20, 40):
        x = np.linspace(0, 1, n + 1)
        vals.append(l2_error(x, 0 * x, trapezoid_weights(n + 1, 1 / n)))
    errs = np.abs(np.array(vals) - 1 / math.sqrt(3))
    assert errs[2] < errs[1] < errs[0] < 1e-2


def test_observed_orders():
    orders, slope = observed_orders([0.1, 0.05, 0.025], [4e-2, 1e-2, 2.5e-3])
    assert np.allclose(orders, [2, 2]) and slope == pytest.approx(2.0)


def test_observed_orders_zero_errors_are_nan():
    orders, slope = observed_orders([0.1, 0.05, 0.025], [0.0, 0.0, 0.0])
    assert all(math.isnan(o) for o in orders) and math.isnan(slope)


def test_exact_field_has_zero_error():
    g = mms_grid_full(20)
    ex = ExactSolutionFull(g.geometry.y_gamma_pm)
    errs = field_errors(g, exact_vector(g, ex), ex)
    assert all(e == 0.0 for e in errs.values())


@pytest.mark.parametrize("seq", [[20, 40], [20, 40, 60], [20, 30, 60]])
def test_bad_sequences(seq):
    with pytest.raises(ValidationError):
        convergence_study(Model.FULL, seq)


def test_error_ratio_between_two_levels():
    rep = convergence_study(Model.FULL, [20, 40, 80])
    for f, e in rep.errors.items():
        assert 3.2 <= e[0] / e[1] <= 4.8, f
    rows = rep.rows()
    assert len(rows) == 21 and math.isnan(rows[0][3])
