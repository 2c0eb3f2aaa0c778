"""Boundary calculus over a model space.

Closed forms (Gromov products, visual metrics, Busemann functions,
cross-ratios, comparison angles) are provided next to independent radial-limit
oracles that evaluate the defining limits at finite radii.  The oracles only
use ``distance`` and ``ray_point``, so they pin the closed forms.
"""

from __future__ import annotations

import math

import numpy as np

from circumext.errors import NumericalConsistencyError
from circumext.spaces import DiskModel, TreeModel, lorentz_dot

ORACLE_RADII = (15.0, 30.0)
RICHARDSON_ORDER = 1


def _scale(s, k):
    if k is not None:
        return float(k)
    return s.k if isinstance(s, DiskModel) else 1.0


def gromov_product(s, x, xi, eta):
    """Gromov product ``(xi | eta)_x``; raises ``ValueError`` when ``xi == eta``."""
    return s.gromov_product(x, xi, eta)


def visual_metric(s, x, xi, eta):
    """Visual metric ``rho_x(xi, eta) = exp(-(xi | eta)_x)``, zero on the diagonal."""
    if s.same_end(xi, eta):
        return 0.0
    return float(s.visual(x, xi, eta))


def busemann(s, x, y, xi):
    """Busemann function ``B(x, y, xi) = lim d(x, a) - d(y, a)`` as ``a -> xi``."""
    return s.busemann(x, y, xi)


def cross_ratio(s, x, quad):
    """Metric cross-ratio ``[xi xi' eta eta']`` measured in the visual metric at ``x``."""
    xi, xi2, eta, eta2 = quad
    for i in range(4):
        for j in range(i + 1, 4):
            if s.same_end(quad[i], quad[j]):
                raise ValueError("cross-ratio needs four distinct boundary points")
    num = visual_metric(s, x, xi, eta) * visual_metric(s, x, xi2, eta2)
    den = visual_metric(s, x, xi, eta2) * visual_metric(s, x, xi2, eta)
    return num / den


def log_cross_ratio(s, x, quad):
    """Logarithm of the cross-ratio via Gromov products (no underflow)."""
    xi, xi2, eta, eta2 = quad
    g = lambda a, b: float(s.gromov_product(x, a, b))
    return g(xi, eta2) + g(xi2, eta) - g(xi, eta) - g(xi2, eta2)


def comparison_angle(s, x, xi, eta, k=None):
    """Limit of comparison angles in curvature ``-k**2``: ``2 arcsin(rho_x(xi, eta)**k)``."""
    if s.same_end(xi, eta):
        raise ValueError("comparison angle needs distinct boundary points")
    k = _scale(s, k)
    rho = visual_metric(s, x, xi, eta)
    return 2.0 * math.asin(min(1.0, rho ** k))


def busemann_angle(s, x, y, xi, k=None, slack=1e-9):
    """Angle at ``x`` between ``y`` and ``xi`` recovered from a Busemann value.

    Inverts ``exp(k B(y, x, xi)) = cosh(k d) - sinh(k d) cos(angle)`` with
    ``d = d(x, y)``.
    """
    k = _scale(s, k)
    d = float(s.distance(x, y))
    if d == 0.0:
        raise ValueError("busemann_angle needs y != x")
    b = float(s.busemann(y, x, xi))
    kd = k * d
    c = (math.cosh(kd) - math.exp(k * b)) / math.sinh(kd)
    if abs(c) > 1.0 + slack:
        raise NumericalConsistencyError(f"cosine {c} left [-1, 1] while inverting the Busemann identity")
    return math.acos(max(-1.0, min(1.0, c)))


def busemann_angle_residual(s, x, y, xi, k=None):
    """Residual of ``exp(kB(y,x,xi)) = cosh(kd) - sinh(kd) cos(angle)`` at the recovered angle."""
    k = _scale(s, k)
    d = float(s.distance(x, y))
    ang = busemann_angle(s, x, y, xi, k)
    lhs = math.exp(k * float(s.busemann(y, x, xi)))
    rhs = math.cosh(k * d) - math.sinh(k * d) * math.cos(ang)
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def riemannian_angle(s, x, xi1, xi2):
    """Angle at ``x`` between the rays to two boundary points (disk only)."""
    _, v1 = s.frame(x, xi1)
    _, v2 = s.frame(x, xi2)
    c = float(lorentz_dot(v1, v2))
    return math.acos(max(-1.0, min(1.0, c)))


def riemannian_angle_to_point(s, x, y, xi):
    """Angle at ``x`` between the geodesic to ``y`` and the ray to ``xi`` (disk only)."""
    X = x.hyperboloid
    Y = y.hyperboloid
    c = -float(lorentz_dot(X, Y))
    W = Y - c * X
    W = W / math.sqrt(max(float(lorentz_dot(W, W)), 1e-300))
    _, V = s.frame(x, xi)
    return math.acos(max(-1.0, min(1.0, float(lorentz_dot(W, V)))))


def log_visual_derivative(s, x, y, xi):
    """``log (d rho_y / d rho_x)(xi)``, which equals ``B(x, y, xi)``."""
    return float(s.busemann(x, y, xi))


def embed_derivative_check(s, x, xi_dir, xi, t):
    """First-order residual ``|log(d rho_y/d rho_x)(xi) - t cos(angle y x xi)|``.

    ``y`` is the point at distance ``t`` along the ray from ``x`` to ``xi_dir``.
    The angle is the Riemannian angle in the disk and the Busemann-defined
    comparison angle in the tree.
    """
    if not 0.0 < t <= 0.1:
        raise ValueError("embed_derivative_check needs 0 < t <= 0.1")
    if isinstance(s, TreeModel):
        from fractions import Fraction

        y = s.ray_point(x, xi_dir, Fraction(t).limit_denominator(10**6))
        tt = float(s.distance(x, y))
        ang = busemann_angle(s, x, y, xi, 1.0)
    else:
        y = s.ray_point(x, xi_dir, t)
        tt = t
        ang = riemannian_angle(s, x, xi_dir, xi)
    return abs(log_visual_derivative(s, x, y, xi) - tt * math.cos(ang))


def gmvt_residual(s, x, y, xi, eta):
    """Relative residual of ``rho_y^2 = rho_x^2 e^{B(x,y,xi)} e^{B(x,y,eta)}`` (in logs)."""
    lhs = -2.0 * float(s.gromov_product(y, xi, eta))
    rhs = -2.0 * float(s.gromov_product(x, xi, eta)) + float(s.busemann(x, y, xi)) + float(s.busemann(x, y, eta))
    return abs(math.expm1(lhs - rhs))


# ---------------------------------------------------------------------------
# Radial-limit oracles
# ---------------------------------------------------------------------------


def richardson(t1, v1, t2, v2, order=RICHARDSON_ORDER):
    """Extrapolate two radial samples assuming an error ``c * exp(-2 * order * t)``.

    The finite-radius defects of Gromov products and Busemann functions decay
    like ``exp(-2t)``, so the extrapolation is taken in that variable.
    """
    w = math.exp(-2.0 * order * (t2 - t1))
    return (v2 - w * v1) / (1.0 - w)


def _radial(s, xi, t):
    if isinstance(s, TreeModel):
        from fractions import Fraction

        return s.ray_point(s.origin, xi, Fraction(int(round(t))))
    return s.ray_point(s.origin, xi, t)


def _extrapolated(s, fn, radii):
    t1, t2 = radii
    v1 = float(fn(t1))
    v2 = float(fn(t2))
    return richardson(t1, v1, t2, v2)


def oracle_gromov_product(s, x, xi, eta, radii=ORACLE_RADII):
    """``(d(x,a) + d(x,b) - d(a,b)) / 2`` at points far out on the radial rays."""

    def at(t):
        a = _radial(s, xi, t)
        b = _radial(s, eta, t)
        return (float(s.distance(x, a)) + float(s.distance(x, b)) - float(s.distance(a, b))) / 2.0

    return _extrapolated(s, at, radii)


def oracle_busemann(s, x, y, xi, radii=ORACLE_RADII):
    def at(t):
        a = _radial(s, xi, t)
        return float(s.distance(x, a)) - float(s.distance(y, a))

    return _extrapolated(s, at, radii)


def oracle_visual(s, x, xi, eta, radii=ORACLE_RADII):
    return math.exp(-oracle_gromov_product(s, x, xi, eta, radii))


def oracle_cross_ratio(s, quad, radii=ORACLE_RADII):
    """``exp((d(a,b) + d(a',b') - d(a,b') - d(a',b)) / 2)`` with the four points on radial rays."""

    def at(t):
        a, a2, b, b2 = (_radial(s, q, t) for q in quad)
        d = lambda p, q: float(s.distance(p, q))
        return 0.5 * (d(a, b) + d(a2, b2) - d(a, b2) - d(a2, b))

    return math.exp(_extrapolated(s, at, radii))


def oracle_comparison_angle(s, x, xi, eta, k=None, radii=(8.0, 16.0)):
    """Comparison angle at ``x`` of the triangle with vertices far out on the rays.

    In curvature ``-k**2`` the law of cosines for an isosceles triangle with legs
    ``R`` and base ``c`` reads ``sin(angle/2) = sinh(k c / 2) / sinh(k R)``.
    """
    k = _scale(s, k)

    def at(t):
        a = s.ray_point(x, xi, t)
        b = s.ray_point(x, eta, t)
        c = float(s.distance(a, b))
        return 2.0 * math.asin(min(1.0, math.sinh(k * c / 2.0) / math.sinh(k * t)))

    return _extrapolated(s, at, radii)


def law_of_cosines_angle(s, x, y, z, k=None):
    """Comparison angle at ``x`` of the triangle ``x y z`` in curvature ``-k**2``."""
    k = _scale(s, k)
    a = float(s.distance(x, y))
    b = float(s.distance(x, z))
    c = float(s.distance(y, z))
    # cosh(kc) = cosh(ka)cosh(kb) - sinh(ka)sinh(kb)cos(angle)
    num = math.cosh(k * a) * math.cosh(k * b) - math.cosh(k * c)
    den = math.sinh(k * a) * math.sinh(k * b)
    return math.acos(max(-1.0, min(1.0, num / den)))


def disk_closed_form_busemann(x, y, angle):
    """``log(|x - xi|^2 / (1 - |x|^2)) - log(|y - xi|^2 / (1 - |y|^2))`` for the unit-curvature disk."""
    z = complex(math.cos(angle), math.sin(angle))
    px = complex(*x.coords)
    py = complex(*y.coords)
    return math.log(abs(px - z) ** 2 / (1.0 - abs(px) ** 2)) - math.log(abs(py - z) ** 2 / (1.0 - abs(py) ** 2))


def grid_diameter_antipodality(s, x, grid):
    """Largest visual distance on the grid and the worst best-partner distance."""
    pts = list(grid.points)
    n = len(pts)
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = visual_metric(s, x, pts[i], pts[j])
    return float(m.max()), float(m.max(axis=1).min())
