import math

import numpy as np
import pytest

from contact_hj.errors import ParameterError
from contact_hj.extgrid import PLUS_INF, Torus, from_function, point_data
from contact_hj.fundamental import (
    c_lipschitz_report, cone_bounds_report, fit_linear_growth, h_slice, min_stability_report, solve_slices,
    superpose, superposition_report,
)
from contact_hj.hamiltonians import catalog_get


def test_h_slice_plain_cone(torus128):
    h = catalog_get("eikonal_plain")
    table = h_slice(h, torus128, 0, 3.0, [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(table.slice_at(0.0).values, point_data(torus128, 0, 3.0).values)
    d = torus128.distance(torus128.nodes(), 0.0)
    final = table.slice_at(1.0)
    assert np.all(final.values[d <= 1.0 - torus128.dx] == 3.0)
    assert final.infinite_mask[d > 1.0 + torus128.dx].all()


def test_h_slice_infinite_source(torus64):
    table = h_slice(catalog_get("quad_discount"), torus64, 5, PLUS_INF, [0.0, 1.0])
    assert all(s.all_infinite for s in table.slices)
    assert table.c.infinite


def test_h_slice_rejects_bad_times(torus64):
    h = catalog_get("eikonal_plain")
    with pytest.raises(ParameterError):
        h_slice(h, torus64, 0, 0.0, [0.5, 1.0])
    with pytest.raises(ParameterError):
        h_slice(h, torus64, 0, 0.0, [0.0, 1.0, 0.5])
    with pytest.raises(ParameterError):
        solve_slices(h, point_data(torus64, 0, 0.0), [0.0, 1.0], solver="spectral")


def test_superpose_is_ball_minimum_for_plain_eikonal():
    torus = Torus(2.0 * math.pi, 32)
    h = catalog_get("eikonal_plain")
    phi = from_function(torus, lambda x: np.sin(x) + 0.3 * np.cos(3 * x))
    t = 0.8
    env = superpose(phi, t, h=h)
    reach = int(math.floor(t / torus.dx))
    stack = np.vstack([np.roll(phi.values, k) for k in range(-reach, reach + 1)])
    np.testing.assert_allclose(env.values, stack.min(axis=0), atol=1e-12)


def test_superpose_needs_tables_or_hamiltonian(torus64):
    with pytest.raises(ParameterError):
        superpose(point_data(torus64, 0, 1.0), 0.5)


def test_superpose_uses_supplied_tables(torus64):
    h = catalog_get("eikonal_discount")
    phi = point_data(torus64, 0, 1.0).minimum(point_data(torus64, 20, -0.5))
    tables = {(y, float(phi.values[y])): h_slice(h, torus64, y, float(phi.values[y]), [0.0, 0.5])
              for y in (0, 20)}
    env = superpose(phi, 0.5, tables)
    expected = np.minimum(tables[(0, 1.0)].slice_at(0.5).values, tables[(20, -0.5)].slice_at(0.5).values)
    np.testing.assert_array_equal(env.values, expected)


def test_superposition_report(torus64):
    h = catalog_get("eikonal_discount")
    phi = point_data(torus64, 0, 1.0).minimum(point_data(torus64, 21, -0.5)).minimum(point_data(torus64, 40, 2.0))
    rep = superposition_report(h, phi, 0.5)
    assert rep.passed, rep.to_dict()
    assert rep.measured <= 1e-12


def test_min_stability_report(torus64):
    h = catalog_get("eikonal_discount")
    rep = min_stability_report(h, point_data(torus64, 0, 1.0), point_data(torus64, 21, -0.5), [0.5, 1.0])
    assert rep.passed, rep.to_dict()
    assert rep.name == "min_commutation"


@pytest.mark.parametrize("name", ["eikonal_plain", "eikonal_discount"])
def test_c_lipschitz(torus128, name):
    h = catalog_get(name)
    rep = c_lipschitz_report(h, torus128, None, [0.5, 1.0], 0, [(-2.0, -1.0), (-1.0, 0.5), (0.5, 2.0), (-2.0, 2.0)])
    assert rep.passed, rep.to_dict()
    assert all(s >= 0.0 for s in rep.details["min_slope_by_t"].values())
    if name == "eikonal_plain":
        assert rep.measured == pytest.approx(1.0)


def test_c_lipschitz_rejects_degenerate_pair(torus64):
    with pytest.raises(ParameterError):
        c_lipschitz_report(catalog_get("eikonal_plain"), torus64, None, [0.5], 0, [(1.0, 1.0)])


def test_fit_linear_growth():
    delta, c1 = fit_linear_growth(catalog_get("eikonal_plain"))
    assert delta == pytest.approx(0.5)
    assert c1 == pytest.approx(0.0)
    delta, c1 = fit_linear_growth(catalog_get("quad_pendulum"))
    assert delta > 0 and math.isfinite(c1)


@pytest.mark.parametrize("name", ["eikonal_plain", "quad_pendulum"])
def test_cone_bounds(torus128, name):
    rep = cone_bounds_report(catalog_get(name), torus128, 0, 1.0)
    assert rep.passed, rep.diagnostics
    assert rep.c0 == pytest.approx(0.0)
