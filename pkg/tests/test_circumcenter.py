import math

import pytest

from circumext.circumcenter import (
    asymptotic_circumcenter,
    barrier_slack,
    busemann_objective,
    circumcenter,
    circumcenter_flow_convergence,
    convergence_csv,
    convexity_probe,
    cosh_distance_objective,
    decreasing_after,
    negative_distance_objective,
    u_K_eval,
    u_K_objective,
    uniform_convergence_error,
    ball_probes,
    uniqueness_probe,
)
from circumext.errors import PreconditionError
from circumext.flow import FlowSet, fan_set, flip, random_flow_set
from circumext.optimize import geodesic_minimize, minimize_max_linear


def test_two_point_circumcenter_is_midpoint(disk, rng):
    x, y = disk.random_point(rng), disk.random_point(rng)
    c, r = circumcenter(disk, [x, y])
    d = disk.distance(x, y)
    assert disk.distance(c, x) == pytest.approx(d / 2, abs=1e-8)
    assert disk.distance(c, y) == pytest.approx(d / 2, abs=1e-8)
    assert r == pytest.approx(d / 2, abs=1e-8)


def test_symmetric_triangle_centered_at_origin(disk):
    pts = [disk.polar(1.5, a) for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)]
    c, _ = circumcenter(disk, pts)
    assert disk.distance(c, disk.origin) < 1e-8


def test_tree_circumcenter_exact(tree):
    a, b = tree.point((0, 1, 0)), tree.point((1, 2))
    c, r = circumcenter(tree, [a, b, tree.origin])
    assert r == tree.distance(a, b) / 2
    assert tree.distance(c, a) == r and tree.distance(c, b) == r


def test_convexity_of_objectives(disk, rng):
    y = disk.random_point(rng)
    assert convexity_probe(cosh_distance_objective(disk, [y]), 200, rng) >= -1e-8
    assert convexity_probe(busemann_objective(disk, y, disk.random_end(rng)), 200, rng) >= -1e-8
    assert convexity_probe(u_K_objective(random_flow_set(disk, rng, 32)), 100, rng) >= -1e-8


def test_negative_control_fails_probe(disk, rng):
    assert convexity_probe(negative_distance_objective(disk, disk.origin), 200, rng) < -1e-8


def test_barrier_slack_zero_for_exact_solution(disk):
    # exp B along the geodesic toward its own end is e^{-t}: g'' - g = 0
    line = disk.line_through(disk.origin, disk.end(0.0))
    obj = busemann_objective(disk, disk.origin, disk.end(0.0))
    assert abs(barrier_slack(obj, line)) < 1e-12


def test_u_K_examples(disk, rng):
    K = fan_set(disk, disk.origin, 64)
    assert u_K_eval(K, disk.origin) == pytest.approx(1.0, abs=1e-12)
    x = disk.random_point(rng)
    assert u_K_eval(K, x, continuum=True) == pytest.approx(math.exp(disk.distance(x, disk.origin)), rel=1e-9)
    line = disk.random_line(rng)
    single = FlowSet(disk, [line])
    assert u_K_eval(single, disk.ray_point(line.foot, line.forward, 1.5)) == pytest.approx(math.exp(-1.5))


def test_improper_u_K_refused(disk, rng):
    line = disk.random_line(rng)
    with pytest.raises(PreconditionError):
        asymptotic_circumcenter(FlowSet(disk, [line, line]))


def test_fan_asymptotic_circumcenter_is_base(disk, rng):
    x = disk.random_point(rng)
    res = asymptotic_circumcenter(fan_set(disk, x, 64))
    assert disk.distance(res.argmin, x) < 1e-8
    assert res.value == pytest.approx(1.0, abs=1e-10)
    assert res.certified


def test_opposite_pair_has_value_one(disk, rng):
    line = disk.line_through(disk.origin, disk.random_end(rng))
    res = asymptotic_circumcenter(FlowSet(disk, [line, flip(line)]))
    assert res.value == pytest.approx(1.0, abs=1e-9)


def test_flow_convergence(disk, rng):
    K = random_flow_set(disk, rng, 64)
    rows = circumcenter_flow_convergence(K, [0, 2, 4, 8, 12])
    assert rows[-1]["distance"] < 1e-3
    assert decreasing_after(rows, 4.0)
    assert convergence_csv(rows).startswith("t,center,distance\n")
    c = asymptotic_circumcenter(K).argmin
    assert uniform_convergence_error(K, 12.0, ball_probes(disk, c, 1.0, rng, 16)) < 1e-3


def test_times_must_increase(disk, rng):
    with pytest.raises(ValueError):
        circumcenter_flow_convergence(random_flow_set(disk, rng, 16), [0, 2, 1])


def test_tree_asymptotic_circumcenter(tree, rng):
    K = fan_set(tree, tree.point((0, 1)), 16)
    res = asymptotic_circumcenter(K)
    assert tree.distance(res.argmin, tree.point((0, 1))) == 0


def test_unique_minimizer(disk, rng):
    K = random_flow_set(disk, rng, 64)
    assert uniqueness_probe(K, rng, starts=4) < 2e-6


def test_line_search_agrees_with_convex_solver(disk, rng):
    K = random_flow_set(disk, rng, 32)
    obj = u_K_objective(K)
    a = minimize_max_linear(obj.functionals).argmin
    b = geodesic_minimize(obj, disk.random_point(rng)).argmin
    assert disk.distance(a, b) < 2e-6
