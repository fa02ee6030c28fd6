import dataclasses
import math

import numpy as np
import pytest

from contact_hj.errors import ParameterError
from contact_hj.hamiltonians import catalog_get, catalog_names
from contact_hj.legendre import (
    default_lambda_shift, fenchel_young_report, lagrangian, lagrangian_tilde, lagrangian_tilde_values,
    lagrangian_values, velocity_bound,
)


def numeric(h):
    return dataclasses.replace(h, closed_lagrangian=None)


def test_closed_form_values():
    assert lagrangian(catalog_get("quad_discount"), 0.0, 2.0, 1.0).value.value == pytest.approx(3.0)
    plain = catalog_get("eikonal_plain")
    assert lagrangian(plain, 0.0, 0.5, 0.0).value.value == 0.0
    assert lagrangian(plain, 0.0, 1.5, 0.0).value.infinite
    assert lagrangian(catalog_get("eikonal_discount"), 0.0, 0.0, 1.0).value.value == pytest.approx(1.0)


@pytest.mark.parametrize("name", ["quad_discount", "quad_pendulum", "quad_drift", "even_well"])
def test_numerical_transform_matches_closed_form(name):
    h = catalog_get(name)
    x, xi, u = np.meshgrid(np.linspace(0, 6, 4), np.linspace(-5, 5, 11), np.linspace(-2, 2, 5))
    np.testing.assert_allclose(lagrangian_values(numeric(h), x, xi, u), h.closed_lagrangian(x, xi, u), atol=1e-6)
    scalar = lagrangian(numeric(h), 1.0, 2.5, 0.5)
    assert scalar.value.value == pytest.approx(float(h.closed_lagrangian(1.0, 2.5, 0.5)), abs=1e-6)
    assert scalar.argmax_p is not None


def test_numerical_transform_detects_infinite_conjugate():
    h = numeric(catalog_get("eikonal_plain"))
    assert lagrangian(h, 0.0, 2.0, 0.0).value.infinite
    assert np.isinf(lagrangian_values(h, 0.0, 2.0, 0.0))
    assert lagrangian(h, 0.0, 0.5, 0.0).value.value == pytest.approx(0.0, abs=1e-9)


def test_lagrangian_tilde_examples():
    assert lagrangian_tilde(catalog_get("eikonal_discount"), 0.0, 0.0, 0.0, 1.0).value == pytest.approx(3.0)
    assert default_lambda_shift(catalog_get("quad_discount")) == 2.0
    value = lagrangian_tilde(catalog_get("quad_discount"), 0.0, 0.0, math.log(2.0), 4.0)
    assert value.value == pytest.approx(12.0)
    assert lagrangian_tilde(catalog_get("eikonal_plain"), 0.0, 3.0, 0.0, 0.0).infinite


def test_lagrangian_tilde_rejects_small_shift():
    with pytest.raises(ParameterError):
        lagrangian_tilde(catalog_get("quad_discount"), 0.0, 0.0, 0.0, 0.0, lambda_shift=0.5)


@pytest.mark.parametrize("name", catalog_names())
def test_lagrangian_tilde_nondecreasing_in_value(name):
    h = catalog_get(name)
    u = np.linspace(-3, 3, 25)
    for t in (0.0, 0.7):
        vals = lagrangian_tilde_values(h, 1.0, 0.5, t, u)
        fin = vals[np.isfinite(vals)]
        assert np.all(np.diff(fin) >= -1e-9)


def test_velocity_bound():
    assert velocity_bound(catalog_get("eikonal_plain"), 5.0, 1.0) == pytest.approx(1.0, abs=0.01)
    assert velocity_bound(catalog_get("quad_discount"), 50.0, 1.0) == pytest.approx(10.1, abs=0.05)
    with pytest.raises(ParameterError):
        velocity_bound(catalog_get("quad_discount"), math.inf, 1.0)


@pytest.mark.parametrize("name", catalog_names())
def test_fenchel_young(name):
    rep = fenchel_young_report(catalog_get(name))
    assert rep.passed, rep.to_dict()
    assert rep.name == "fenchel_young"
