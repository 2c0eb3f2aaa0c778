import math
from fractions import Fraction

import numpy as np
import pytest

from circumext.errors import ValidationError
from circumext.flow import (
    FlowSet,
    compose_maps,
    conjugacy,
    conjugacy_foot_residual,
    conjugated_fan,
    corrupted_map,
    element_distance,
    fan_set,
    flip,
    flow,
    identity_map,
    isometry_map,
    limit_quotient_derivative,
    map_derivative,
    three_point_log_derivative,
)


def test_flow_group_law_and_flip(disk, rng):
    for _ in range(50):
        g = disk.random_line(rng)
        a, b = rng.uniform(-3, 3, size=2)
        assert element_distance(disk, flow(disk, flow(disk, g, a), b), flow(disk, g, a + b)) < 1e-9
        assert element_distance(disk, flip(flow(disk, g, a)), flow(disk, flip(g), -a)) < 1e-9
        assert flip(flip(g)) == g


def test_tree_flow_exact(tree, rng):
    g = tree.random_line(rng)
    h = flow(tree, flow(tree, g, Fraction(1, 2)), Fraction(3, 2))
    assert element_distance(tree, h, flow(tree, g, 2)) == 0


def test_isometry_conjugacy(disk, rng):
    g = disk.random_isometry(rng, reflect=True)
    f = isometry_map(disk, g).validate(rng)
    for _ in range(30):
        line = disk.random_line(rng)
        img = conjugacy(f, line)
        assert element_distance(disk, img, g.apply_line(line)) < 1e-8
        assert element_distance(disk, conjugacy(f, flip(line)), flip(img)) < 1e-8
        assert element_distance(disk, conjugacy(f, flow(disk, line, 1.3)), flow(disk, img, 1.3)) < 1e-8
        assert conjugacy_foot_residual(f, line, img) < 1e-8


def test_identity_conjugacy_is_identity(disk, rng):
    f = identity_map(disk).validate(rng)
    line = disk.random_line(rng)
    assert element_distance(disk, conjugacy(f, line), line) < 1e-10


def test_tree_conjugacy_exact(tree, rng):
    h = tree.random_isometry(rng)
    f = isometry_map(tree, h).validate(rng, quads=50)
    for _ in range(10):
        line = tree.random_line(rng)
        assert element_distance(tree, conjugacy(f, line), h.apply_line(line)) == 0


def test_unvalidated_map_is_refused(disk, rng):
    f = isometry_map(disk, disk.random_isometry(rng))
    with pytest.raises(ValidationError):
        conjugacy(f, disk.random_line(rng))


def test_corrupted_map_fails_validation(disk, rng):
    f = corrupted_map(disk, 1e-3).validate(rng)
    assert not f.validated
    assert f.validation["cross_ratio_error"] > 1e-7
    with pytest.raises(ValidationError):
        conjugacy(f, disk.random_line(rng))


def test_map_derivative_oracle(disk, rng):
    f = isometry_map(disk, disk.random_isometry(rng)).validate(rng)
    for _ in range(20):
        x, y = disk.random_point(rng), disk.random_point(rng)
        a = disk.random_end(rng)
        assert map_derivative(f, x, y, a) == pytest.approx(limit_quotient_derivative(f, x, y, a), rel=1e-6)


def test_three_point_formula_matches_hint(disk, rng):
    f = isometry_map(disk, disk.random_isometry(rng)).validate(rng)
    x, y = disk.random_point(rng), disk.random_point(rng)
    a = disk.random_end(rng)
    assert three_point_log_derivative(f, x, y, a) == pytest.approx(f.log_derivative(x, y, a), abs=1e-9)


def test_tree_derivative_oracle(tree, rng):
    f = isometry_map(tree, tree.random_isometry(rng)).validate(rng, quads=50)
    x, y = tree.random_point(rng), tree.random_point(rng)
    a = tree.random_end(rng)
    assert map_derivative(f, x, y, a) == pytest.approx(limit_quotient_derivative(f, x, y, a), rel=1e-12)


def test_composition_chain_rule(disk, rng):
    f = isometry_map(disk, disk.random_isometry(rng)).validate(rng)
    h = isometry_map(disk, disk.random_isometry(rng)).validate(rng)
    c = compose_maps(h, f).validate(rng)
    x, y = disk.random_point(rng), disk.random_point(rng)
    a = disk.random_end(rng)
    assert c.log_derivative(x, y, a) == pytest.approx(three_point_log_derivative(c, x, y, a), abs=1e-9)


def test_conjugated_fan_family_matches_lines(disk, rng):
    f = isometry_map(disk, disk.random_isometry(rng)).validate(rng)
    x = disk.random_point(rng)
    K = conjugated_fan(f, x, 32)
    W = K.family(2 * math.pi * np.arange(32) / 32)
    for g, w in zip(K.elements, W):
        z = disk.random_point(rng)
        from circumext.spaces import lorentz_dot

        assert -lorentz_dot(z.hyperboloid, w) == pytest.approx(math.exp(disk.busemann(z, g.foot, g.forward)),
                                                              rel=1e-8)


def test_flow_set_requires_elements(disk):
    with pytest.raises(ValueError):
        FlowSet(disk, [])


def test_fan_set_has_distinct_endpoints(disk):
    K = fan_set(disk, disk.origin, 16)
    assert not K.singleton_endpoint
    assert FlowSet(disk, [K.elements[0]]).singleton_endpoint
