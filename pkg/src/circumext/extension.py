"""The circumcenter extension of a Moebius boundary map and its verification suites.

``f_hat(x)`` is the asymptotic circumcenter of the image of the direction fan
at ``x`` under the flow conjugacy of ``f``.  Equivalently it is the point whose
visual metric is nearest, in the distance on Moebius metrics, to the
push-forward ``f_* rho_x``; :func:`nearest_visual_projection` computes that
projection for any metric, including non-visual synthetic ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from circumext.circumcenter import asymptotic_circumcenter
from circumext.flow import MoebiusBoundaryMap, conjugated_family, conjugated_fan
from circumext.metrics import MoebiusMetric, dM_distance, pushforward
from circumext.optimize import exp_map, minimize_max_family, minimize_max_linear, tangent_frame
from circumext.spaces import TWO_PI, DiskIsometry, DiskModel, DiskPoint, lorentz_dot, null_vector

HALF_LOG2 = 0.5 * math.log(2.0)
ARGMAX_WIDTH = 1e-6


def circumcenter_extension(f: MoebiusBoundaryMap, x, n: int = 128, continuum: bool = False):
    """``f_hat(x)``: asymptotic circumcenter of the conjugated direction fan at ``x``.

    With ``continuum`` the supremum in ``u_K`` runs over the whole unit tangent
    circle (the fan of size ``n`` seeds the exchange method); otherwise it runs
    over the ``n`` fan lines only.
    """
    if n < 16:
        raise ValueError("the extension needs a fan of at least 16 directions")
    s = f.space
    if isinstance(s, DiskModel) and not continuum:
        # Same functionals as the explicitly conjugated lines, built in one pass.
        family = conjugated_family(f, x)
        return minimize_max_linear(family(TWO_PI * np.arange(n) / n)).argmin
    K = conjugated_fan(f, x, n)
    use_family = continuum and K.family is not None
    return asymptotic_circumcenter(K, continuum=use_family).argmin


def _projection_family(rho: MoebiusMetric):
    """``W(theta)`` with ``exp d(rho_z, rho) = sup_theta -<Z, W(theta)>``."""
    s = rho.space
    o = rho.base

    def family(theta):
        theta = np.asarray(theta, dtype=float)
        # log(d rho / d rho_z)(xi) = lam(xi) + h(z, xi) - h(o, xi)
        w = np.exp(np.asarray(rho.log_density(theta), dtype=float) - s.horofunction(o, theta))
        return null_vector(theta) * w[:, None]

    return family


def nearest_visual_projection(rho: MoebiusMetric, grid=None, start=None):
    """Point ``z`` minimizing ``d(rho, rho_z)`` and the minimal value."""
    rho.require_validated()
    s = rho.space
    if not isinstance(s, DiskModel) or s.k != 1.0:
        raise ValueError("nearest visual projection is implemented for the unit-curvature disk")
    grid = s.grid(512) if grid is None else grid
    res = minimize_max_family(_projection_family(rho), grid.points, start)
    return res.argmin, math.log(res.value)


def log_derivative_at(rho: MoebiusMetric, z):
    """``xi -> log(d rho / d rho_z)(xi)`` (vectorized over disk angles)."""
    s = rho.space
    o = rho.base
    return lambda t: np.asarray(rho.log_density(t), dtype=float) + s.horofunction(z, t) - s.horofunction(o, t)


def argmax_set(rho: MoebiusMetric, z, width: float = ARGMAX_WIDTH, n: int = 4096):
    """Boundary angles where ``log(d rho / d rho_z)`` is within ``width`` of its maximum."""
    g = log_derivative_at(rho, z)
    theta = TWO_PI * np.arange(n) / n
    vals = g(theta)
    h = TWO_PI / n
    peaks = np.flatnonzero((vals >= np.roll(vals, 1)) & (vals >= np.roll(vals, -1)))
    refined = []
    for i in peaks:
        refined.append(_refine_peak(g, float(theta[i]), h))
    top = max([vals.max()] + [v for v, _ in refined])
    out = [a for v, a in refined if v >= top - width]
    out.extend(float(t) for t in theta[vals >= top - width])
    return np.array(sorted(set(out))), float(top)


def _refine_peak(g, center: float, h: float):
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(lambda t: -float(g(np.array([t]))[0]), bounds=(center - h, center + h),
                          method="bounded", options={"xatol": 1e-12})
    return float(-res.fun), float(res.x) % TWO_PI


def certificate_probes(z: DiskPoint, boundary: int = 64, interior: int = 16, radius: float = 0.5):
    """Boundary directions equally spaced as seen from ``z`` plus interior points around it."""
    move = DiskIsometry.translation(z)
    ends = move.apply_angles(TWO_PI * np.arange(boundary) / boundary)
    X = z.hyperboloid
    U, V = tangent_frame(X)
    pts = []
    for j in range(interior):
        a = TWO_PI * (j + 0.5) / interior
        pts.append(DiskPoint.from_hyperboloid(exp_map(X, math.cos(a) * U + math.sin(a) * V, radius)))
    return list(ends), pts


def angle_certificate(rho: MoebiusMetric, z, probes=None, width: float = ARGMAX_WIDTH,
                      threshold: float = math.pi / 2 - 1e-3):
    """Worst over probes ``y`` of the best angle ``y z eta`` with ``eta`` in the argmax set.

    At the minimizer of ``z -> d(rho, rho_z)`` every probe sees some maximizing
    direction at angle at least ``pi/2``.  Returns ``(worst_angle, passed)``.
    """
    etas, _ = argmax_set(rho, z, width)
    ends, pts = certificate_probes(z) if probes is None else probes
    X = z.hyperboloid
    # unit tangents at z toward the maximizing ends and toward each probe
    V = _tangents_to_ends(X, etas)
    dirs = []
    if len(ends):
        dirs.append(_tangents_to_ends(X, np.array([getattr(e, "angle", e) for e in ends], dtype=float)))
    if len(pts):
        Y = np.array([y.hyperboloid for y in pts])
        W = Y + lorentz_dot(Y, X[None, :])[:, None] * X[None, :]
        dirs.append(W / np.sqrt(lorentz_dot(W, W))[:, None])
    D = np.concatenate(dirs)
    cos = np.clip(lorentz_dot(D[:, None, :], V[None, :, :]), -1.0, 1.0)
    worst = float(np.arccos(cos.min(axis=1)).min())
    return worst, worst >= threshold


def certified_projection(rho: MoebiusMetric, reruns: int = 2):
    """Nearest visual projection checked by :func:`angle_certificate`.

    A failed certificate marks the minimizer as suspect; the solve is repeated
    from the suspect point on a doubled grid.  Returns
    ``(z, log_value, worst_angle, passed)``.
    """
    grid = rho.space.grid(512)
    z, v = nearest_visual_projection(rho, grid)
    worst, ok = angle_certificate(rho, z)
    for _ in range(reruns):
        if ok:
            break
        grid = rho.space.grid(2 * grid.n)
        z, v = nearest_visual_projection(rho, grid, start=z)
        worst, ok = angle_certificate(rho, z)
    return z, v, worst, ok


def _tangents_to_ends(X, angles):
    N = null_vector(np.asarray(angles, dtype=float))
    return N / (-lorentz_dot(X[None, :], N))[:, None] - X[None, :]


def displaced(z: DiskPoint, distance: float, rng) -> DiskPoint:
    X = z.hyperboloid
    U, V = tangent_frame(X)
    a = rng.uniform(0.0, TWO_PI)
    return DiskPoint.from_hyperboloid(exp_map(X, math.cos(a) * U + math.sin(a) * V, distance))


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


@dataclass
class ExtensionReport:
    """Per-sample extension records plus the worst observed defects."""

    map_description: str
    fan_size: int
    seed: object
    records: list = field(default_factory=list)
    worst_qi_defect: float = 0.0
    worst_point_defect: float = 0.0
    worst_holder_residual: float = -math.inf
    worst_sqrt_residual: float = -math.inf
    tolerances: dict = field(default_factory=dict)


class ExtensionCache:
    """Memoizes ``f_hat`` by sample point."""

    def __init__(self, f, n: int = 128, continuum: bool = False):
        self.f, self.n, self.continuum = f, n, continuum
        self._memo = {}

    def __call__(self, x):
        key = (x.r, x.theta)
        if key not in self._memo:
            self._memo[key] = circumcenter_extension(self.f, x, self.n, self.continuum)
        return self._memo[key]


def point_near(space, x: DiskPoint, rng, max_distance: float = 1.0) -> DiskPoint:
    """Random point at distance at most ``max_distance`` from ``x``."""
    return displaced(x, float(rng.uniform(0.0, max_distance)), rng)


def holder_suite(f: MoebiusBoundaryMap, pairs: int, rng, n: int = 128, radius: float = 3.0,
                 report: ExtensionReport | None = None, ext=None):
    """Residuals of ``cosh d(fx, fy) <= e^{d(x,y)}`` and ``d(fx, fy) <= 2 d(x,y)^(1/2)`` for ``d <= 1``."""
    f.require_validated()
    s = f.space
    ext = ExtensionCache(f, n) if ext is None else ext
    report = ExtensionReport(f.description, n, None) if report is None else report
    for _ in range(pairs):
        x = s.random_point(rng, radius)
        y = point_near(s, x, rng)
        d = float(s.distance(x, y))
        e = float(s.distance(ext(x), ext(y)))
        report.worst_holder_residual = max(report.worst_holder_residual, math.cosh(e) - math.exp(d))
        report.worst_sqrt_residual = max(report.worst_sqrt_residual, e - 2.0 * math.sqrt(d))
    return max(report.worst_holder_residual, report.worst_sqrt_residual), report


def point_defect(f: MoebiusBoundaryMap, x, fx, grid) -> float:
    """``d(f_* rho_x, rho_{f_hat(x)})`` in the distance on Moebius metrics."""
    s = f.space
    return dM_distance(pushforward(f, MoebiusMetric.visual(s, x)), MoebiusMetric.visual(s, fx), grid)


def quasi_isometry_suite(f: MoebiusBoundaryMap, pairs: int, rng, n: int = 128, radius: float = 3.0,
                         grid=None, report: ExtensionReport | None = None, ext=None):
    """Worst additive defect ``|d(fx, fy) - d(x, y)|`` and worst per-point defect."""
    f.require_validated()
    s = f.space
    grid = s.grid(256) if grid is None else grid
    ext = ExtensionCache(f, n) if ext is None else ext
    report = ExtensionReport(f.description, n, None) if report is None else report
    for _ in range(pairs):
        x = s.random_point(rng, radius)
        y = s.random_point(rng, radius)
        fx, fy = ext(x), ext(y)
        qi = abs(float(s.distance(fx, fy)) - float(s.distance(x, y)))
        px = point_defect(f, x, fx, grid)
        report.worst_qi_defect = max(report.worst_qi_defect, qi)
        report.worst_point_defect = max(report.worst_point_defect, px)
        report.records.append({"x": s.point_to_json(x), "f_hat": s.point_to_json(fx), "defect": px})
    return report.worst_qi_defect, report
