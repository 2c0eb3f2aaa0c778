"""Circumcenters, the objective ``u_K`` and asymptotic circumcenters.

On the disk every objective used here is a supremum of functions
``z -> -<Z, W>`` on the hyperboloid: ``cosh d(z, p) = -<Z, P>`` and
``exp B(z, p, xi) = -<Z, N_xi> / -<P, N_xi>``.  Minimization therefore goes
through :func:`circumext.optimize.minimize_max_linear`.  On the tree the
circumcenter of a finite set is the midpoint of a diametral pair, computed
exactly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from circumext.errors import PreconditionError
from circumext.flow import FlowSet, disk_functional, flow
from circumext.optimize import (
    POSITION_TOL,
    MinimizerResult,
    exp_map,
    family_sup,
    minimize_max_family,
    minimize_max_linear,
)
from circumext.spaces import DiskModel, DiskPoint, TreeModel, lorentz_dot


@dataclass
class ConvexObjective:
    """Positive objective that is F(-1)-convex along geodesics.

    ``functionals`` holds the vectors ``W_i`` when the objective is
    ``max_i -<Z, W_i>`` on the disk (in curvature -1 units).
    """

    kind: str
    space: object
    evaluate: Callable
    functionals: np.ndarray | None = None
    source: object = None

    def __call__(self, z):
        return self.evaluate(z)


def _check_unit_disk(space):
    if isinstance(space, DiskModel) and space.k != 1.0:
        raise ValueError("hyperboloid objectives are implemented for the unit-curvature disk")


def cosh_distance_objective(space, points, scale: float = 1.0) -> ConvexObjective:
    """``z -> scale * max_i cosh d(z, p_i)``."""
    if isinstance(space, DiskModel):
        _check_unit_disk(space)
        P = np.array([p.hyperboloid for p in points]) * scale
        ev = lambda z: float(np.max(-lorentz_dot(z.hyperboloid[None, :], P)))
        return ConvexObjective("circumradius_cosh", space, ev, P, points)
    ev = lambda z: scale * max(math.cosh(float(space.distance(z, p))) for p in points)
    return ConvexObjective("circumradius_cosh", space, ev, None, points)


def busemann_objective(space, y, xi) -> ConvexObjective:
    """``z -> exp B(z, y, xi)``."""
    ev = lambda z: math.exp(float(space.busemann(z, y, xi)))
    return ConvexObjective("exp_busemann", space, ev)


def negative_distance_objective(space, y) -> ConvexObjective:
    """``z -> -d(z, y)``: not F(-1)-convex near ``y`` (negative control)."""
    ev = lambda z: -float(space.distance(z, y))
    return ConvexObjective("negative_distance", space, ev)


def u_K_objective(K: FlowSet, continuum: bool = False) -> ConvexObjective:
    """``u_K(z) = sup_{gamma in K} exp B(z, gamma(0), gamma(+inf))``."""
    s = K.space
    if continuum and K.family is None:
        raise ValueError("this flow set carries no continuum family")
    if isinstance(s, DiskModel):
        _check_unit_disk(s)
        W = np.array([disk_functional(s, g) for g in K.elements])
        if continuum:
            grid = s.grid(max(256, 2 * K.fan_size)).points
            ev = lambda z: max(family_sup(K.family, grid, z), float(np.max(-lorentz_dot(z.hyperboloid[None, :], W))))
            return ConvexObjective("u_K", s, ev, W, K)
        ev = lambda z: float(np.max(-lorentz_dot(z.hyperboloid[None, :], W)))
        return ConvexObjective("u_K", s, ev, W, K)
    ev = lambda z: math.exp(max(float(s.busemann(z, g.foot, g.forward)) for g in K.elements))
    return ConvexObjective("u_K", s, ev, None, K)


def u_K_eval(K: FlowSet, z, continuum: bool = False) -> float:
    return u_K_objective(K, continuum)(z)


# ---------------------------------------------------------------------------
# Circumcenters
# ---------------------------------------------------------------------------


def tree_segment_point(space: TreeModel, a, b, t):
    """Point at distance ``t`` from ``a`` on the segment ``[a, b]`` of the tree."""
    t = Fraction(t)
    ha, hb = space.height(a), space.height(b)
    c = 0
    for u, v in zip(a.word, b.word):
        if u != v:
            break
        c += 1
    if c == len(a.word) or c == len(b.word):
        if ha >= hb:
            return space._point_on_word(a.word, ha - t)
        return space._point_on_word(b.word, ha + t)
    hm = c * space.edge_length
    if t <= ha - hm:
        return space._point_on_word(a.word, ha - t)
    return space._point_on_word(b.word, hm + (t - (ha - hm)))


def circumcenter(space, points) -> tuple:
    """Center minimizing ``z -> max_i d(z, p_i)`` and the minimax radius."""
    points = list(points)
    if not points:
        raise ValueError("circumcenter of an empty set")
    if len(points) == 1:
        return points[0], 0.0 if isinstance(space, DiskModel) else Fraction(0)
    if isinstance(space, TreeModel):
        best = (Fraction(-1), None, None)
        for i, p in enumerate(points):
            for q in points[i + 1:]:
                d = space.distance(p, q)
                if d > best[0]:
                    best = (d, p, q)
        d, p, q = best
        return tree_segment_point(space, p, q, d / 2), d / 2
    obj = cosh_distance_objective(space, points)
    res = minimize_max_linear(obj.functionals)
    radius = max(float(space.distance(res.argmin, p)) for p in points)
    return res.argmin, radius


def _require_proper(K: FlowSet):
    if K.singleton_endpoint:
        raise PreconditionError("u_K is not proper when all forward endpoints coincide")


def asymptotic_circumcenter(K: FlowSet, continuum: bool = False, start=None, tol: float = POSITION_TOL,
                            max_time: int = 256) -> MinimizerResult:
    """Unique minimizer of ``u_K``.

    Disk: exact minimization of the max of linear functionals, over the finite
    set or (``continuum=True``) over the continuum family the set samples.
    Tree: circumcenters of the flowed foot sets ``A_t`` for doubling ``t`` until
    two consecutive ones coincide.
    """
    _require_proper(K)
    s = K.space
    if isinstance(s, DiskModel):
        if continuum:
            if K.family is None:
                raise ValueError("this flow set carries no continuum family")
            grid = s.grid(max(256, 2 * K.fan_size)).points
            return minimize_max_family(K.family, grid, start, tol)
        return minimize_max_linear(u_K_objective(K).functionals, start, tol)
    t = 4
    prev, _ = circumcenter(s, K.flowed(t).feet())
    iters = 1
    while t < max_time:
        t *= 2
        cur, _ = circumcenter(s, K.flowed(t).feet())
        iters += 1
        if cur == prev:
            return MinimizerResult(cur, u_K_eval(K, cur), 0.0, iters, True, f"stabilized(t={t})")
        prev = cur
    raise RuntimeError("flowed circumcenters did not stabilize")


def flowed_circumcenter(K: FlowSet, t: float, start=None):
    """Circumcenter of ``A_t``, the feet of ``K`` flowed for time ``t``."""
    s = K.space
    feet = K.flowed(t).feet()
    if isinstance(s, TreeModel):
        return circumcenter(s, feet)[0]
    # 2 e^{-t} cosh d keeps the functionals of order one for large t
    obj = cosh_distance_objective(s, feet, 2.0 * math.exp(-t))
    return minimize_max_linear(obj.functionals, start).argmin


def circumcenter_flow_convergence(K: FlowSet, times, center=None) -> list[dict]:
    """Rows ``(t, c(A_t), d(c(A_t), c_inf(K)))`` for increasing ``times``."""
    times = list(times)
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be increasing")
    s = K.space
    c_inf = asymptotic_circumcenter(K).argmin if center is None else center
    rows = []
    start = None
    for t in times:
        c = flowed_circumcenter(K, t, start)
        start = c if isinstance(s, DiskModel) else None
        rows.append({"t": float(t), "center": s.point_to_json(c), "distance": float(s.distance(c, c_inf))})
    return rows


def convergence_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "center", "distance"])
    for r in rows:
        c = r["center"]
        label = f"{c['r']:.12e}:{c['theta']:.12e}" if "r" in c else f"{c['word']}:{c['offset']}"
        w.writerow([f"{r['t']:.6g}", label, f"{r['distance']:.6e}"])
    return buf.getvalue()


def decreasing_after(rows, t0: float, noise: float = 1e-8) -> bool:
    """Distances are non-increasing from time ``t0`` on, up to ``noise``."""
    d = [r["distance"] for r in rows if r["t"] >= t0]
    return all(b <= a + noise for a, b in zip(d, d[1:]))


def uniform_convergence_error(K: FlowSet, t: float, probes) -> float:
    """``max |u_t(z) - u_K(z)|`` over probes, ``u_t = 2 e^{-t} max cosh d(z, A_t)``."""
    s = K.space
    u_t = cosh_distance_objective(s, K.flowed(t).feet(), 2.0 * math.exp(-t))
    u = u_K_objective(K)
    return max(abs(u_t(z) - u(z)) for z in probes)


def ball_probes(space, center: DiskPoint, radius: float, rng, count: int = 64):
    """Center plus points drawn uniformly (in area) from the ball of given radius."""
    X = center.hyperboloid
    from circumext.optimize import tangent_frame

    U, V = tangent_frame(X)
    out = [center]
    for _ in range(count - 1):
        r = math.acosh(1.0 + rng.random() * (math.cosh(radius) - 1.0))
        a = rng.uniform(0.0, 2.0 * math.pi)
        out.append(DiskPoint.from_hyperboloid(exp_map(X, math.cos(a) * U + math.sin(a) * V, r)))
    return out


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------


def barrier_slack(objective: ConvexObjective, line, h: float = 1e-2) -> float:
    """``(f(-h) + f(h)) / (2 cosh h) - f(0)`` along a geodesic line.

    The comparison ``g`` with ``g'' - g = 0`` matching ``f`` at ``+-h`` has
    midpoint value ``(f(-h) + f(h)) / (2 cosh h)``; nonnegative slack is the
    discrete barrier test for ``f'' - f >= 0``.
    """
    s = objective.space
    f = lambda t: objective(s.geodesic_point(line, t))
    return (f(-h) + f(h)) / (2.0 * math.cosh(h)) - f(0.0)


def convexity_probe(objective: ConvexObjective, trials: int, rng, h: float = 1e-2, radius: float = 3.0) -> float:
    """Worst barrier slack over ``trials`` random geodesics through the radius ball."""
    s = objective.space
    worst = math.inf
    for _ in range(trials):
        line = s.random_line(rng, radius)
        worst = min(worst, barrier_slack(objective, line, h))
    return worst


def uniqueness_probe(K: FlowSet, rng, starts: int = 8, radius: float = 3.0, line_search: bool = False) -> float:
    """Largest pairwise distance between minimizers of ``u_K`` from random starts."""
    s = K.space
    obj = u_K_objective(K)
    found = []
    for _ in range(starts):
        x0 = s.random_point(rng, radius)
        if line_search:
            from circumext.optimize import geodesic_minimize

            found.append(geodesic_minimize(obj, x0).argmin)
        else:
            found.append(minimize_max_linear(obj.functionals, x0).argmin)
    return max(float(s.distance(a, b)) for i, a in enumerate(found) for b in found[i + 1:])


def stability_probe(K: FlowSet, rng, move: float = 1e-3) -> float:
    """Shift of ``c_inf`` when every foot moves at most ``move`` along its line."""
    s = K.space
    c0 = asymptotic_circumcenter(K).argmin
    moved = FlowSet(s, [flow(s, g, float(rng.uniform(-move, move))) for g in K.elements], None, K.fan_size)
    c1 = asymptotic_circumcenter(moved).argmin
    return float(s.distance(c0, c1))
