import math
from fractions import Fraction

import numpy as np
import pytest

from circumext.errors import DomainError
from circumext.spaces import (
    DiskIsometry,
    DiskModel,
    DiskPoint,
    GeodesicLine,
    SampleGrid,
    TreeEnd,
    lorentz_dot,
)


def test_disk_distance_log3(disk):
    assert disk.distance(disk.origin, disk.point(0.5, 0.0)) == pytest.approx(math.log(3.0), abs=1e-14)


def test_scaled_disk_divides_distance(rng):
    d1, d2 = DiskModel(1.0), DiskModel(2.0)
    x, y = d1.random_point(rng), d1.random_point(rng)
    assert d2.distance(x, y) == pytest.approx(d1.distance(x, y) / 2.0, rel=1e-14)


def test_curvature_scale_below_one_is_rejected():
    with pytest.raises(ValueError):
        DiskModel(0.5)


def test_points_outside_disk_rejected(disk):
    with pytest.raises(DomainError):
        disk.point(1.0, 0.0)
    with pytest.raises(DomainError):
        disk.point(0.8, 0.8)


def test_polar_storage_reaches_far_radii(disk):
    x = disk.polar(30.0, 0.3)
    assert disk.distance(disk.origin, x) == pytest.approx(30.0, rel=1e-14)


def test_hyperboloid_round_trip(disk, rng):
    x = disk.random_point(rng)
    X = x.hyperboloid
    assert lorentz_dot(X, X) == pytest.approx(-1.0, abs=1e-12)
    y = DiskPoint.from_hyperboloid(X)
    assert disk.distance(x, y) < 1e-9


def test_distance_axioms_random(disk, rng):
    for _ in range(200):
        x, y, z = (disk.random_point(rng) for _ in range(3))
        assert disk.distance(x, z) <= disk.distance(x, y) + disk.distance(y, z) + 1e-9
        assert disk.distance(x, y) == pytest.approx(disk.distance(y, x), abs=1e-12)


def test_geodesic_unit_speed(disk, rng):
    for _ in range(100):
        line = disk.random_line(rng)
        a, b = rng.uniform(-4, 4, size=2)
        d = disk.distance(disk.geodesic_point(line, a), disk.geodesic_point(line, b))
        assert d == pytest.approx(abs(a - b), abs=1e-9)


def test_diameter_example(disk):
    line = GeodesicLine(disk.end(math.pi), disk.end(0.0), disk.origin)
    u, v = disk.geodesic_point(line, math.log(3.0)).coords
    assert (u, v) == pytest.approx((0.5, 0.0), abs=1e-12)


def test_direction_fan_four(disk):
    fan = disk.direction_fan(disk.origin, 4)
    angles = [g.forward.angle for g in fan]
    assert angles == pytest.approx([0, math.pi / 2, math.pi, 3 * math.pi / 2], abs=1e-12)
    for g in fan:
        assert disk.line_defect(g) < 1e-12


def test_fan_minimum_size(disk):
    with pytest.raises(ValueError):
        disk.direction_fan(disk.origin, 3)


def test_sample_grid_minimum():
    with pytest.raises(ValueError):
        SampleGrid(8, list(range(8)))


def test_isometries_preserve_quantities(disk, rng):
    for _ in range(50):
        g = disk.random_isometry(rng, reflect=True)
        x, y = disk.random_point(rng), disk.random_point(rng)
        xi, eta = disk.random_end(rng), disk.random_end(rng)
        assert disk.distance(g.apply_point(x), g.apply_point(y)) == pytest.approx(disk.distance(x, y), abs=1e-9)
        assert disk.busemann(g.apply_point(x), g.apply_point(y), g.apply_end(xi)) == pytest.approx(
            disk.busemann(x, y, xi), abs=1e-9)
        assert disk.gromov_product(g.apply_point(x), g.apply_end(xi), g.apply_end(eta)) == pytest.approx(
            disk.gromov_product(x, xi, eta), abs=1e-8)


def test_isometry_inverse_and_translation(disk, rng):
    x = disk.random_point(rng)
    T = DiskIsometry.translation(x)
    assert disk.distance(T.apply_point(disk.origin), x) < 1e-12
    g = disk.random_isometry(rng)
    y = disk.random_point(rng)
    assert disk.distance(g.inverse().apply_point(g.apply_point(y)), y) < 1e-9


def test_projection_to_line(disk, rng):
    for _ in range(50):
        a, b = disk.random_end(rng), disk.random_end(rng)
        z = disk.random_point(rng)
        p = disk.project_to_line(a, b, z)
        line = disk.line_between(a, b, p)
        dz = disk.distance(z, p)
        for t in (-0.3, 0.2, 1.0):
            assert disk.distance(z, disk.geodesic_point(line, t)) >= dz - 1e-9


def test_gromov_product_requires_distinct_ends(disk):
    with pytest.raises(ValueError):
        disk.gromov_product(disk.origin, disk.end(1.0), disk.end(1.0))


def test_tree_distance_exact(tree):
    assert tree.distance(tree.point((0, 1)), tree.point((1, 2))) == 4
    x = tree.point((0, 1), Fraction(1, 3))
    assert tree.distance(x, tree.origin) == Fraction(5, 3)


def test_tree_rejects_unreduced_words(tree):
    with pytest.raises(DomainError):
        tree.point((0, 0))


def test_tree_end_canonical():
    a = TreeEnd((0, 1), (0, 1))
    b = TreeEnd((0,), (1, 0))
    assert a == b


def test_tree_busemann_and_gromov_exact(tree, rng):
    for _ in range(50):
        x, y = tree.random_point(rng), tree.random_point(rng)
        xi = tree.random_end(rng)
        B = tree.busemann(x, y, xi)
        assert isinstance(B, Fraction)
        assert abs(B) <= tree.distance(x, y)
        z = tree.random_point(rng)
        assert tree.busemann(x, y, xi) + tree.busemann(y, z, xi) == tree.busemann(x, z, xi)


def test_tree_geodesic_points_exact(tree, rng):
    for _ in range(30):
        line = tree.random_line(rng)
        p = tree.geodesic_point(line, Fraction(5, 2))
        q = tree.geodesic_point(line, Fraction(-3, 2))
        assert tree.distance(p, q) == 4
        assert tree.line_defect(line) == 0


def test_tree_isometry_preserves_distance(tree, rng):
    for _ in range(30):
        g = tree.random_isometry(rng)
        x, y = tree.random_point(rng), tree.random_point(rng)
        assert tree.distance(g.apply_point(x), g.apply_point(y)) == tree.distance(x, y)
        assert tree.distance(g.inverse().apply_point(g.apply_point(x)), x) == 0


def test_tree_fan_lines_through_point(tree):
    x = tree.point((0, 1), Fraction(1, 2))
    fan = tree.direction_fan(x, 16)
    assert len(fan) == 16
    for g in fan:
        assert tree.line_defect(g) == 0


def test_random_point_radius(disk, rng):
    pts = [disk.random_point(rng, 2.0) for _ in range(200)]
    assert max(disk.distance(disk.origin, p) for p in pts) <= 2.0 + 1e-12
    assert np.isfinite([p.r for p in pts]).all()
