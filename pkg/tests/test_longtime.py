import numpy as np
import pytest

from contact_hj.cauchy_fd import tol_scheme
from contact_hj.errors import ParameterError
from contact_hj.extgrid import constant, squared_distance, sup_metric
from contact_hj.hamiltonians import catalog_get
from contact_hj.longtime import (
    LongtimeConfig, classify, cluster, contact_gap, contact_gap_report, duality_gap, mono_report,
    order_reversal_report, sandwich_check, stationarity_residual, stationary_limit, t_infinity,
)


@pytest.mark.parametrize("kwargs", [
    {"block_t": 0.0}, {"t_max": 1.0}, {"stop_tol": 0.0}, {"solver": "spectral"}, {"trailing_blocks": 0},
    {"escape": -1.0},
])
def test_config_validation(kwargs):
    with pytest.raises(ParameterError):
        LongtimeConfig(**kwargs)


def test_constant_is_immediately_stationary(torus64):
    phi = constant(torus64, 1.5)
    res = stationary_limit(catalog_get("eikonal_plain"), phi)
    assert res.converged and not res.diverged
    assert res.t_final == 1.0
    np.testing.assert_array_equal(res.limit.values, phi.values)
    assert stationarity_residual(catalog_get("eikonal_plain"), phi) == 0.0


def test_quadratic_is_a_stationary_limit(torus128):
    h = catalog_get("quad_discount")
    phi = squared_distance(torus128, [0.0])
    res = stationary_limit(h, phi)
    assert res.converged
    assert sup_metric(res.limit, phi) <= tol_scheme(phi)
    assert res.residual_history[-1][1] < 1e-4


def test_divergence_is_flagged(torus64):
    res = stationary_limit(catalog_get("quad_pendulum"), constant(torus64, -3.0))
    assert res.diverged and not res.converged
    assert "reason" in res.diagnostics
    assert res.t_final < 10.0


def test_t_infinity_of_even_well_constants(torus64):
    h = catalog_get("even_well")
    res = t_infinity(h, constant(torus64, 1.0), "forward")
    assert res.converged
    np.testing.assert_allclose(res.limit.values, -1.0)
    assert mono_report(h, constant(torus64, 1.0), "forward", result=res).passed
    with pytest.raises(ParameterError):
        t_infinity(h, constant(torus64, 1.0), "backward")


def test_duality_gap_for_constant(torus64):
    gap = duality_gap(catalog_get("even_well"), constant(torus64, -1.0))
    assert gap.converged
    assert gap.gap == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(gap.image_ominus.values, 1.0)


def test_contact_gap(torus128):
    h = catalog_get("quad_discount")
    u0 = squared_distance(torus128, [0.0])
    gaps = contact_gap(h, u0, [0.0, 0.5, 1.0, 2.0])
    assert gaps[0] == 0.0
    assert np.all(np.abs(gaps) <= tol_scheme(u0))
    assert contact_gap_report(h, u0, [0.0, 0.5, 1.0, 2.0]).passed


def test_cluster_groups_close_functions(torus64):
    a, b, c = constant(torus64, 0.0), constant(torus64, 0.01), constant(torus64, 1.0)
    assert cluster([a, c, b], 0.05) == [[0, 2], [1]]
    assert cluster([a, c], 0.05) == [[0], [1]]


def test_classify_even_well(torus64):
    h = catalog_get("even_well")
    seeds = [
        constant(torus64, -1.0),
        constant(torus64, 0.0),
        squared_distance(torus64, [0.0]).shifted(1.0),
        squared_distance(torus64, [np.pi]).shifted(1.0),
    ]
    report = classify(h, seeds)
    assert report.excluded == {}
    assert report.counts == (3, 2)
    assert report.members[0] == [0, 1]
    assert report.passed, [c.to_dict() for c in report.checks]
    assert report.to_dict()["counts"] == {"stationary_clusters": 3, "distinct_images": 2}


def test_classify_needs_two_seeds(torus64):
    with pytest.raises(ParameterError):
        classify(catalog_get("even_well"), [constant(torus64, 0.0)])


def test_sandwich_clips_to_the_stationary_solution(torus64):
    h = catalog_get("quad_discount")
    u = squared_distance(torus64, [0.0])
    rep = sandwich_check(h, u, [u.negated()], u.scaled(0.5))
    assert rep.passed
    assert rep.details["clipped_nodes"] > 0
    with pytest.raises(ParameterError):
        sandwich_check(h, u, [], u)


def test_order_reversal_requires_ordered_inputs(torus64):
    h = catalog_get("even_well")
    with pytest.raises(ParameterError):
        order_reversal_report(h, constant(torus64, 1.0), constant(torus64, -1.0))


def test_duality_gap_rejects_non_stationary_input(torus64):
    h = catalog_get("quad_pendulum")
    with pytest.raises(ParameterError):
        duality_gap(h, constant(torus64, 0.0))


def test_t_infinity_keeps_the_well_value(torus64):
    # a smooth max of the start sits on the well x = 0, where u(0, t) = u(0, 0) e^t
    h = catalog_get("quad_pendulum")
    v = squared_distance(torus64, [0.0], 0.25)
    res = t_infinity(h, v, "forward", LongtimeConfig(t_max=10.0))
    assert not res.diverged
    assert res.limit.values[0] == 0.0
    assert np.all(res.limit.values >= v.negated().values)


def test_t_infinity_iterates_dominate_the_start(torus128):
    h = catalog_get("quad_discount")
    u0 = squared_distance(torus128, [0.0])
    res = t_infinity(h, u0, "ominus")
    assert np.all(res.limit.values >= -u0.values)
    assert res.diagnostics["min_increment"] >= -10.0 * tol_scheme(res.limit)


def test_classify_excludes_diverging_seed(torus64):
    report = classify(catalog_get("quad_pendulum"), [constant(torus64, 0.0), constant(torus64, -3.0)])
    assert report.excluded[1].startswith("diverged")
    assert report.to_dict()["excluded"] == {"1": report.excluded[1]}


def test_class_report_names_cluster_files(torus64):
    seeds = [constant(torus64, -1.0), squared_distance(torus64, [0.0]).shifted(1.0)]
    clusters = classify(catalog_get("even_well"), seeds).to_dict()["clusters"]
    assert [c["center_csv"] for c in clusters] == [f"cluster_{i}.csv" for i in range(len(clusters))]
    assert [c["image_csv"] for c in clusters] == [f"image_{i}.csv" for i in range(len(clusters))]
