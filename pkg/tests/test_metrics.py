import math

import numpy as np
import pytest

from circumext.errors import ValidationError
from circumext.flow import isometry_map
from circumext.metrics import (
    MoebiusMetric,
    derivative,
    dM_distance,
    log_derivative,
    maxmin_report,
    metric_eval,
    pushforward,
    random_radon_metric,
    validate_metric,
    validated,
)


@pytest.fixture
def grid(disk):
    return disk.grid(256)


def test_visual_metric_matches_space(disk, rng):
    x = disk.random_point(rng)
    rho = MoebiusMetric.visual(disk, x)
    a, b = rng.uniform(0, 2 * math.pi, size=2)
    assert metric_eval(rho, a, b) == pytest.approx(disk.visual(x, a, b), rel=1e-12)


def test_euclidean_radon_norm_is_origin_visual(disk, rng):
    rho = MoebiusMetric.radon(disk, np.eye(2), 2.0)
    a, b = rng.uniform(0, 2 * math.pi, size=2)
    assert metric_eval(rho, a, b) == pytest.approx(disk.visual(disk.origin, a, b), rel=1e-12)


def test_radon_requires_sl2(disk):
    with pytest.raises(ValueError):
        MoebiusMetric.radon(disk, 2 * np.eye(2), 3.0)


def test_max_times_min_is_one(disk, rng, grid):
    for _ in range(5):
        r1 = random_radon_metric(disk, rng, grid)
        r2 = MoebiusMetric.visual(disk, disk.random_point(rng))
        rep = maxmin_report(r2, r1, grid)
        assert rep.product_residual < 1e-6
        assert rep.partner_residual < 1e-6


def test_maxmin_example_log3(disk, grid):
    rep = maxmin_report(MoebiusMetric.visual(disk, disk.point(0.5, 0)), MoebiusMetric.visual(disk, disk.origin), grid)
    assert math.exp(rep.log_max) == pytest.approx(3.0, abs=1e-9)
    assert math.exp(rep.log_min) == pytest.approx(1 / 3, abs=1e-9)


def test_isometric_embedding(disk, rng, grid):
    for _ in range(20):
        x, y = disk.random_point(rng), disk.random_point(rng)
        d = dM_distance(MoebiusMetric.visual(disk, x), MoebiusMetric.visual(disk, y), grid)
        assert d == pytest.approx(disk.distance(x, y), abs=1e-5)


def test_dM_log3_example(disk, grid):
    d = dM_distance(MoebiusMetric.visual(disk, disk.origin), MoebiusMetric.visual(disk, disk.point(0.5, 0)), grid)
    assert d == pytest.approx(math.log(3.0), abs=1e-12)


def test_derivative_chain_and_reciprocal(disk, rng, grid):
    r1 = random_radon_metric(disk, rng, grid)
    r2 = MoebiusMetric.visual(disk, disk.random_point(rng))
    r3 = random_radon_metric(disk, rng, grid)
    a = rng.uniform(0, 2 * math.pi)
    assert log_derivative(r3, r1)(a) == pytest.approx(log_derivative(r3, r2)(a) + log_derivative(r2, r1)(a),
                                                       abs=1e-10)
    assert derivative(r2, r1)(a) * derivative(r1, r2)(a) == pytest.approx(1.0, abs=1e-12)


def test_mean_value_round_trip(disk, rng, grid):
    r1 = random_radon_metric(disk, rng, grid)
    r2 = random_radon_metric(disk, rng, grid)
    a, b = rng.uniform(0, 2 * math.pi, size=2)
    D = derivative(r2, r1)
    assert metric_eval(r1, a, b) * math.sqrt(D(a) * D(b)) == pytest.approx(metric_eval(r2, a, b), rel=1e-10)


def test_validation_accepts_and_rejects(disk, grid):
    assert validate_metric(MoebiusMetric.synthetic(disk, lambda t: 0.0 * np.asarray(t)), grid).passed
    big = validate_metric(MoebiusMetric.synthetic(disk, lambda t: 5.0 * np.cos(t)), grid)
    assert not big.passed
    assert not big.checks["triangle"]
    i, k, j = big.witness
    assert 0 <= min(i, j, k) and max(i, j, k) < 256


def test_small_perturbation_fails_diameter_then_antipodes(disk, grid):
    rho = MoebiusMetric.synthetic(disk, lambda t: 0.1 * np.cos(t))
    rep = validate_metric(rho, grid)
    assert rep.checks == {"triangle": True, "diameter": False, "antipodal": True}
    rep2 = validate_metric(rho.renormalized(rep.shift), grid)
    assert rep2.checks["diameter"] and not rep2.checks["antipodal"]


def test_unvalidated_metric_is_refused(disk, grid):
    rho = MoebiusMetric.synthetic(disk, lambda t: 5.0 * np.cos(t))
    with pytest.raises(ValidationError):
        dM_distance(rho, MoebiusMetric.visual(disk, disk.origin), grid)
    with pytest.raises(ValidationError):
        validated(rho, grid)


def test_pushforward_of_visual_by_isometry(disk, rng, grid):
    g = disk.random_isometry(rng)
    f = isometry_map(disk, g).validate(rng)
    x = disk.random_point(rng)
    pts = np.asarray(grid.points)
    pushed = pushforward(f, MoebiusMetric.visual(disk, x)).lam_many(pts)
    direct = MoebiusMetric.visual(disk, g.apply_point(x)).lam_many(pts)
    assert np.max(np.abs(pushed - direct)) < 1e-9


def test_json_round_trip_is_provisional(disk, rng, grid):
    rho = random_radon_metric(disk, rng, grid)
    back = MoebiusMetric.from_json(rho.to_json(disk.grid(1024)))
    assert not back.validated
    a = np.asarray(grid.points)
    assert np.max(np.abs(back.lam_many(a) - rho.lam_many(a))) < 1e-4


def test_tree_visual_metrics_embed(tree, rng):
    g = tree.grid(4)
    for _ in range(10):
        x, y = tree.random_point(rng, 2), tree.random_point(rng, 2)
        d = dM_distance(MoebiusMetric.visual(tree, x), MoebiusMetric.visual(tree, y), g)
        assert d == pytest.approx(float(tree.distance(x, y)), abs=1e-12)
