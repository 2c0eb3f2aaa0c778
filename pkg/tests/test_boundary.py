import math

import pytest

from circumext import boundary as bd
from circumext.errors import NumericalConsistencyError
from circumext.spaces import DiskModel


def test_gromov_oracle_agreement(disk, rng):
    for _ in range(100):
        x = disk.random_point(rng)
        a, b = disk.random_end(rng), disk.random_end(rng)
        assert bd.gromov_product(disk, x, a, b) == pytest.approx(bd.oracle_gromov_product(disk, x, a, b), abs=1e-6)


def test_busemann_oracle_and_closed_form(disk, rng):
    for _ in range(100):
        x, y = disk.random_point(rng), disk.random_point(rng)
        a = disk.random_end(rng)
        o = bd.oracle_busemann(disk, x, y, a)
        assert bd.busemann(disk, x, y, a) == pytest.approx(o, abs=1e-6)
        assert bd.disk_closed_form_busemann(x, y, a.angle) == pytest.approx(o, abs=1e-8)


def test_visual_metric_properties(disk, rng):
    x = disk.random_point(rng)
    a = disk.random_end(rng)
    assert bd.visual_metric(disk, x, a, a) == 0.0
    b = disk.opposite_end(x, a)
    assert bd.visual_metric(disk, x, a, b) == pytest.approx(1.0, abs=1e-12)


def test_mean_value_identity(disk, rng):
    for _ in range(200):
        x, y = disk.random_point(rng), disk.random_point(rng)
        a, b = disk.random_end(rng), disk.random_end(rng)
        assert bd.gmvt_residual(disk, x, y, a, b) < 1e-8


def test_mean_value_identity_tree(tree, rng):
    for _ in range(50):
        x, y = tree.random_point(rng), tree.random_point(rng)
        a, b = tree.random_end(rng), tree.random_end(rng)
        if tree.same_end(a, b):
            continue
        assert bd.gmvt_residual(tree, x, y, a, b) < 1e-12


def test_cross_ratio_basepoint_free(disk, rng):
    quad = [disk.random_end(rng) for _ in range(4)]
    c = bd.cross_ratio(disk, disk.origin, quad)
    assert bd.cross_ratio(disk, disk.random_point(rng), quad) == pytest.approx(c, rel=1e-8)
    assert bd.oracle_cross_ratio(disk, quad) == pytest.approx(c, rel=1e-6)


def test_cross_ratio_square_example(disk):
    quad = [disk.end(a) for a in (0, math.pi / 2, math.pi, 3 * math.pi / 2)]
    assert bd.cross_ratio(disk, disk.origin, quad) == pytest.approx(2.0, abs=1e-12)


def test_cross_ratio_rejects_repeats(disk):
    with pytest.raises(ValueError):
        bd.cross_ratio(disk, disk.origin, [disk.end(0.0)] * 2 + [disk.end(1.0), disk.end(2.0)])


def test_comparison_angle_k2_example():
    d2 = DiskModel(2.0)
    # opposite rays seen at visual distance 1/sqrt(2): angle pi/3 when k = 2
    assert 2 * math.asin((1 / math.sqrt(2)) ** 2) == pytest.approx(math.pi / 3)
    x = d2.origin
    assert bd.comparison_angle(d2, x, d2.end(0.0), d2.end(math.pi)) == pytest.approx(math.pi, abs=1e-12)


def test_comparison_angle_matches_finite_triangles(disk, rng):
    for _ in range(50):
        x = disk.random_point(rng, 2.0)
        a, b = disk.random_end(rng), disk.random_end(rng)
        assert bd.comparison_angle(disk, x, a, b) == pytest.approx(bd.oracle_comparison_angle(disk, x, a, b), abs=1e-4)


def test_busemann_angle_round_trip_and_riemannian(disk, rng):
    for _ in range(100):
        x, y = disk.random_point(rng), disk.random_point(rng)
        a = disk.random_end(rng)
        assert bd.busemann_angle_residual(disk, x, y, a) < 1e-8
        assert bd.busemann_angle(disk, x, y, a) == pytest.approx(bd.riemannian_angle_to_point(disk, x, y, a), abs=1e-6)


def test_busemann_angle_flags_inconsistent_input(disk, monkeypatch):
    x, y = disk.origin, disk.point(0.5, 0.0)
    monkeypatch.setattr(disk, "busemann", lambda *a: 10.0)
    with pytest.raises(NumericalConsistencyError):
        bd.busemann_angle(disk, x, y, disk.end(0.0))


def test_embed_derivative_decays(disk, rng):
    for _ in range(20):
        x = disk.random_point(rng)
        d, xi = disk.random_end(rng), disk.random_end(rng)
        r = [bd.embed_derivative_check(disk, x, d, xi, t) / t for t in (0.1, 0.05, 0.025)]
        assert r[2] < r[0]


def test_embed_derivative_rejects_large_step(disk):
    with pytest.raises(ValueError):
        bd.embed_derivative_check(disk, disk.origin, disk.end(0.0), disk.end(1.0), 0.5)


def test_richardson_exact_for_model_error():
    c, v = 3.0, 1.25
    f = lambda t: v + c * math.exp(-2 * t)
    assert bd.richardson(2.0, f(2.0), 4.0, f(4.0)) == pytest.approx(v, abs=1e-14)


def test_grid_diameter_antipodality(disk):
    dmax, partner = bd.grid_diameter_antipodality(disk, disk.origin, disk.grid(64))
    assert dmax == pytest.approx(1.0, abs=1e-12)
    assert partner == pytest.approx(1.0, abs=1e-12)
