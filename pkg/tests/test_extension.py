import math

import pytest

from circumext.circumcenter import u_K_eval
from circumext.extension import (
    HALF_LOG2,
    angle_certificate,
    argmax_set,
    circumcenter_extension,
    displaced,
    holder_suite,
    nearest_visual_projection,
    quasi_isometry_suite,
)
from circumext.flow import compose_maps, conjugated_fan, identity_map, isometry_map
from circumext.metrics import MoebiusMetric, dM_distance, pushforward, random_radon_metric


@pytest.fixture
def iso_map(disk, rng):
    g = disk.random_isometry(rng, reflect=True)
    return g, isometry_map(disk, g).validate(rng)


def test_extension_recovers_isometry(disk, rng, iso_map):
    g, f = iso_map
    for _ in range(10):
        x = disk.random_point(rng)
        assert disk.distance(circumcenter_extension(f, x), g.apply_point(x)) < 1e-5


def test_extension_of_identity(disk, rng):
    f = identity_map(disk).validate(rng)
    x = disk.random_point(rng)
    assert disk.distance(circumcenter_extension(f, x), x) < 1e-8


def test_continuum_and_finite_fan_agree_for_isometries(disk, rng, iso_map):
    _, f = iso_map
    x = disk.random_point(rng)
    a = circumcenter_extension(f, x, 64)
    b = circumcenter_extension(f, x, 64, continuum=True)
    assert disk.distance(a, b) < 1e-6


def test_fan_too_small(disk, iso_map):
    with pytest.raises(ValueError):
        circumcenter_extension(iso_map[1], disk.origin, 8)


def test_naturality(disk, rng, iso_map):
    _, f = iso_map
    G = disk.random_isometry(rng)
    H = disk.random_isometry(rng)
    fg = isometry_map(disk, G).validate(rng)
    fh = isometry_map(disk, H).validate(rng)
    comp = compose_maps(fh, compose_maps(f, fg)).validate(rng)
    x = disk.random_point(rng, 2.0)
    lhs = circumcenter_extension(comp, x)
    rhs = H.apply_point(circumcenter_extension(f, G.apply_point(x)))
    assert disk.distance(lhs, rhs) < 1e-5


def test_nearest_point_identity(disk, rng, iso_map):
    _, f = iso_map
    x = disk.random_point(rng)
    K = conjugated_fan(f, x, 128)
    rho = pushforward(f, MoebiusMetric.visual(disk, x))
    for _ in range(5):
        z = disk.random_point(rng)
        lhs = math.exp(dM_distance(rho, MoebiusMetric.visual(disk, z), disk.grid(256)))
        assert lhs == pytest.approx(u_K_eval(K, z, continuum=True), rel=1e-5)
    z, v = nearest_visual_projection(rho)
    assert disk.distance(z, circumcenter_extension(f, x)) < 2e-5
    assert v < 1e-8


def test_projection_of_synthetic_metric(disk, rng):
    grid = disk.grid(256)
    rho = random_radon_metric(disk, rng, grid)
    z, v = nearest_visual_projection(rho)
    assert 0 <= v <= HALF_LOG2 + 1e-4
    assert dM_distance(rho, MoebiusMetric.visual(disk, z), grid) == pytest.approx(v, abs=1e-6)
    worst, ok = angle_certificate(rho, z)
    assert ok and worst >= math.pi / 2 - 1e-3
    _, ok_far = angle_certificate(rho, displaced(z, 0.1, rng))
    assert not ok_far


def test_argmax_set_of_visual_metric_is_whole_circle(disk):
    etas, top = argmax_set(MoebiusMetric.visual(disk, disk.origin), disk.origin, n=256)
    assert len(etas) >= 256
    assert abs(top) < 1e-12


def test_holder_and_qi_small(disk, rng, iso_map):
    _, f = iso_map
    worst, rep = holder_suite(f, 20, rng)
    assert rep.worst_holder_residual <= 1e-4
    assert rep.worst_sqrt_residual <= 1e-4
    qi, rep = quasi_isometry_suite(f, 10, rng)
    assert qi <= math.log(2) + 1e-4
    assert rep.worst_point_defect <= HALF_LOG2 + 1e-4
    assert len(rep.records) == 10


def test_certified_projection_reruns_on_failure(disk, rng, monkeypatch):
    import circumext.extension as ext

    rho = random_radon_metric(disk, rng, disk.grid(256))
    calls = []
    real = ext.angle_certificate

    def flaky(r, z, *a, **k):
        worst, ok = real(r, z, *a, **k)
        calls.append(ok)
        return worst, ok and len(calls) > 1

    monkeypatch.setattr(ext, "angle_certificate", flaky)
    z, v, worst, ok = ext.certified_projection(rho)
    assert len(calls) == 2 and ok
    assert worst >= math.pi / 2 - 1e-3
