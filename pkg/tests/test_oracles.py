import math

import numpy as np
import pytest

from contact_hj.errors import ParameterError
from contact_hj.cauchy_fd import tol_scheme
from contact_hj.extgrid import constant, from_function, squared_distance
from contact_hj.hamiltonians import catalog_get
from contact_hj.oracles import OracleSpec, closed_form, closed_form_residual, fine_oracle


def test_cone_discount_values(torus128):
    cone = closed_form("cone_discount", {"c": 1.0, "y": 0}, torus128, 1.0)
    d = torus128.distance(torus128.nodes(), 0.0)
    np.testing.assert_allclose(cone.values[d <= 1.0], math.e)
    assert cone.infinite_mask[d > 1.0].all()
    ev = closed_form("cone_plain", {"c": -2.0, "y": 3}, torus128)
    assert callable(ev)
    assert ev(0.0).values[3] == -2.0 and ev(0.0).infinite_mask.sum() == torus128.n - 1


def test_stationary_families(torus64):
    np.testing.assert_allclose(closed_form("quad_family", {"K": [0]}, torus64).values,
                               squared_distance(torus64, [0.0]).values)
    np.testing.assert_array_equal(closed_form("even_well_family", {"const": True}, torus64).values, -1.0)
    well = closed_form("even_well_family", {"K": [0, 32]}, torus64)
    assert well.values[0] == 1.0 and well.values[32] == pytest.approx(1.0)


def test_oracle_errors(torus64):
    with pytest.raises(ParameterError):
        closed_form("quad_family", {"K": []}, torus64)
    with pytest.raises(ParameterError):
        OracleSpec("unknown")
    with pytest.raises(ParameterError):
        closed_form("cone_plain", {"c": 0.0}, torus64, -1.0)


@pytest.mark.parametrize("ham, name, params", [
    ("quad_discount", "quad_family", {"K": [0]}),
    ("quad_discount", "quad_family", {"K": [0, 21]}),
    ("even_well", "even_well_family", {"K": [0]}),
    ("even_well", "even_well_family", {"const": True}),
])
def test_stationary_residuals_vanish(torus64, ham, name, params):
    assert closed_form_residual(catalog_get(ham), name, params, torus64) <= 1e-9


def test_cone_residual_is_small(torus128):
    res = closed_form_residual(catalog_get("eikonal_discount"), "cone_discount", {"c": 1.0, "y": 0}, torus128, 1.0)
    assert res <= 1e-2
    with pytest.raises(ParameterError):
        closed_form_residual(catalog_get("eikonal_discount"), "cone_discount", {"c": 1.0}, torus128)


def test_wrong_family_has_large_residual(torus64):
    res = closed_form_residual(catalog_get("quad_pendulum"), "quad_family", {"K": [0]}, torus64)
    assert res > 0.5


def test_fine_oracle_constant_data():
    h = catalog_get("eikonal_plain")
    res = fine_oracle(h, lambda torus: constant(torus, 0.0), 0.5, [16, 32, 64])
    assert res.reliable
    assert res.gaps == [0.0, 0.0]
    assert res.fd_dp_gaps == [0.0, 0.0, 0.0]
    assert res.value.torus.n == 16


def test_fine_oracle_on_smooth_data():
    h = catalog_get("quad_pendulum")
    res = fine_oracle(h, lambda torus: from_function(torus, np.sin), 0.25, [16, 32, 64])
    assert res.value.torus.n == 16
    assert len(res.gaps) == 2 and all(0.0 < g < 1.0 for g in res.gaps)
    assert all(g is not None and math.isfinite(g) for g in res.fd_dp_gaps)
    assert res.fd_dp_gaps[-1] <= tol_scheme(res.value)


def test_fine_oracle_needs_three_levels_to_be_reliable():
    h = catalog_get("eikonal_plain")
    res = fine_oracle(h, lambda torus: constant(torus, 0.0), 0.5, [16, 32])
    assert res.gaps == [0.0]
    assert not res.reliable


@pytest.mark.parametrize("levels", [[32], [32, 16], [32, 48]])
def test_fine_oracle_level_validation(levels):
    with pytest.raises(ParameterError):
        fine_oracle(catalog_get("eikonal_plain"), lambda torus: constant(torus, 0.0), 0.5, levels)
