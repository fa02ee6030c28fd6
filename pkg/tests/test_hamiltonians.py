import dataclasses
import math

import numpy as np
import pytest

from contact_hj.errors import CatalogError, ParameterError
from contact_hj.hamiltonians import audit, catalog_get, catalog_names, even_well_bridge, ominus, viscous


def test_catalog_lists_all_entries():
    assert catalog_names() == sorted(
        ["eikonal_plain", "eikonal_discount", "quad_discount", "quad_pendulum", "quad_drift", "even_well"]
    )


def test_catalog_errors():
    with pytest.raises(CatalogError):
        catalog_get("no_such_hamiltonian")
    with pytest.raises(ParameterError):
        catalog_get("quad_discount", {"period": -1.0})
    with pytest.raises(ParameterError):
        catalog_get("quad_discount", {"drift": np.cos})


def test_known_values():
    assert catalog_get("quad_discount").eval(0.3, 2.0, 1.0) == pytest.approx(1.0)
    assert catalog_get("eikonal_discount").eval(0.0, -2.0, 0.5) == pytest.approx(1.5)
    assert catalog_get("quad_pendulum").eval(0.0, 0.0, 0.0) == pytest.approx(0.0)
    assert catalog_get("quad_pendulum").eval(math.pi, 0.0, 0.0) == pytest.approx(-2.0)
    assert catalog_get("quad_drift").eval(math.pi / 2, 1.0, 0.0) == pytest.approx(1.5)


def test_custom_period_and_drift():
    h = catalog_get("quad_drift", {"period": 1.0, "drift": lambda x: 0.0 * np.asarray(x)})
    assert h.period == 1.0
    assert h.eval(0.25, 2.0, 1.0) == pytest.approx(1.0)


def test_even_well_bridge():
    assert float(even_well_bridge(-1.0)) == 0.0
    assert float(even_well_bridge(0.0)) == 0.75
    assert float(even_well_bridge(0.5)) == pytest.approx(0.5)
    assert float(even_well_bridge(0.5 + 1e-12)) == pytest.approx(0.5)
    u = np.linspace(-3, 3, 101)
    np.testing.assert_allclose(even_well_bridge(u), even_well_bridge(-u))


@pytest.mark.parametrize("name", ["eikonal_discount", "quad_pendulum", "quad_drift", "even_well"])
def test_ominus_flips_momentum_and_value(name):
    h = catalog_get(name)
    hm = ominus(h)
    x, p, u = np.meshgrid(np.linspace(0, 6, 5), np.linspace(-3, 3, 7), np.linspace(-2, 2, 5))
    np.testing.assert_allclose(hm.eval(x, p, u), h.eval(x, -p, -u))
    assert hm.lam == h.lam
    np.testing.assert_allclose(ominus(hm).eval(x, p, u), h.eval(x, p, u))


@pytest.mark.parametrize("name", catalog_names())
def test_ominus_is_an_involution_on_random_samples(name):
    h = catalog_get(name)
    back = ominus(ominus(h))
    rng = np.random.default_rng(11)
    x = rng.uniform(0.0, h.period, 100)
    p, u, xi = rng.uniform(-4.0, 4.0, (3, 100))
    np.testing.assert_array_equal(back.eval(x, p, u), h.eval(x, p, u))
    if h.closed_lagrangian is not None:
        np.testing.assert_array_equal(back.closed_lagrangian(x, xi, u), h.closed_lagrangian(x, xi, u))
    if h.p_star is not None:
        np.testing.assert_array_equal(back.p_star(x, u), h.p_star(x, u))


def test_ominus_closed_lagrangian_and_p_star():
    h = catalog_get("quad_drift")
    hm = ominus(h)
    x = np.linspace(0, 6, 7)
    np.testing.assert_allclose(hm.closed_lagrangian(x, 0.7, 0.3), h.closed_lagrangian(x, -0.7, -0.3))
    np.testing.assert_allclose(hm.p_star(x, 0.0), np.sin(x))


def test_viscous():
    h = catalog_get("quad_discount")
    assert viscous(h, 0.0).closed_lagrangian is h.closed_lagrangian
    hv = viscous(h, 0.5)
    assert hv.closed_lagrangian is None and hv.p_star is None
    assert hv.eval(0.0, 2.0, 1.0) == pytest.approx(3.0)
    with pytest.raises(ParameterError):
        viscous(h, -0.1)


@pytest.mark.parametrize("name", catalog_names())
def test_audit_passes_for_catalog(name):
    h = catalog_get(name)
    rep = audit(h)
    assert rep.passed
    assert rep.convexity_violations == 0
    assert rep.failed_r == []
    assert rep.estimated_lambda <= h.lam + 1e-9


def test_audit_flags_concave_hamiltonian():
    h = catalog_get("quad_discount")
    bad = dataclasses.replace(
        h, name="concave", eval=lambda x, p, u: -0.5 * np.square(p) + 0.0 * np.asarray(x) + 0.0 * np.asarray(u),
    )
    rep = audit(bad)
    assert not rep.passed
    assert rep.convexity_violations > 0


def test_audit_rejects_small_samples():
    with pytest.raises(ParameterError):
        audit(catalog_get("eikonal_plain"), x_samples=[0.0, 1.0])
