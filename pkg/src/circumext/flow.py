"""Geodesic flow space, Moebius boundary maps and the induced flow conjugacy.

A flow element is a :class:`~circumext.spaces.GeodesicLine`: an ordered pair
of distinct boundary points together with a time-zero foot point on the line
between them.  A Moebius boundary map ``f`` sends it to the line from
``f(backward)`` to ``f(forward)``, footed at the unique point ``y`` where the
derivative ``df_{rho_x, rho_y}(forward)`` equals one (``x`` the old foot).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from circumext.errors import ValidationError
from circumext.spaces import (
    TWO_PI,
    DiskIsometry,
    DiskModel,
    GeodesicLine,
    TreeIsometry,
    TreeModel,
    canonical_angle,
    lorentz_dot,
    null_vector,
)

FlowElement = GeodesicLine
THREE_POINT_OFFSETS = (TWO_PI / 3.0, 2.0 * TWO_PI / 3.0)


# ---------------------------------------------------------------------------
# Flow and flip
# ---------------------------------------------------------------------------


def _time(space, t):
    return Fraction(t) if isinstance(space, TreeModel) else float(t)


def flow(space, g: GeodesicLine, t) -> GeodesicLine:
    """Move the foot point distance ``t`` toward the forward endpoint."""
    if t == 0:
        return g
    return GeodesicLine(g.backward, g.forward, space.geodesic_point(g, _time(space, t)))


def flip(g: GeodesicLine) -> GeodesicLine:
    """Reverse the orientation, keeping the foot point."""
    return GeodesicLine(g.forward, g.backward, g.foot)


def foot(g: GeodesicLine):
    """Projection ``gamma -> gamma(0)``."""
    return g.foot


def endpoint(g: GeodesicLine):
    """Projection ``gamma -> gamma(+inf)``."""
    return g.forward


def element_distance(space, a: GeodesicLine, b: GeodesicLine) -> float:
    """Largest of the foot distance and the two endpoint discrepancies.

    Endpoint discrepancies are measured in the visual metric at ``a``'s foot,
    so the result is zero exactly when the two elements coincide.
    """
    d = float(space.distance(a.foot, b.foot))
    for u, v in ((a.forward, b.forward), (a.backward, b.backward)):
        if not space.same_end(u, v):
            d = max(d, float(space.visual(a.foot, u, v)))
    return d


# ---------------------------------------------------------------------------
# Moebius boundary maps
# ---------------------------------------------------------------------------


def _disk_log_cr(x, a, b, c, d):
    """Log cross-ratio ``[a b c d]`` at the origin, vectorized over angles."""
    s = lambda u, v: np.log(np.abs(np.sin((u - v) / 2.0)))
    return s(a, c) + s(b, d) - s(a, d) - s(b, c)


@dataclass
class MoebiusBoundaryMap:
    """Boundary map with inverse, optional derivative hint and validation state.

    ``derivative_hint(x, y, eta)`` returns ``log df_{rho_x, rho_y}(eta)``; maps
    without a hint use the three-point formula.  ``isometry`` is set for maps
    induced by an isometry of the space.
    """

    space: object
    forward: Callable
    inverse: Callable
    description: str
    derivative_hint: Callable | None = None
    isometry: object = None
    validated: bool = False
    validation: dict = field(default_factory=dict)

    def __call__(self, xi):
        return self.forward(xi)

    def require_validated(self):
        if not self.validated:
            raise ValidationError(f"boundary map {self.description!r} has not passed validation")
        return self

    def log_derivative(self, x, y, eta):
        """``log df_{rho_x, rho_y}(eta)``; exact rational for tree isometries."""
        if self.derivative_hint is not None:
            return self.derivative_hint(x, y, eta)
        return three_point_log_derivative(self, x, y, eta)

    def validate(self, rng, grid=None, quads: int = 1000, inverse_tol: float = 1e-9,
                 cross_ratio_tol: float = 1e-7) -> "MoebiusBoundaryMap":
        """Check ``f o f^-1 = id`` on the grid and cross-ratio preservation.

        Returns a validated copy on success; otherwise records the failure in
        ``validation`` and returns ``self`` still unvalidated.
        """
        s = self.space
        grid = s.grid() if grid is None else grid
        if isinstance(s, DiskModel):
            a = np.asarray(grid.points, dtype=float)
            back = self.forward(self.inverse(a))
            inv_err = float(np.max(np.abs(np.sin((back - a) / 2.0))) * 2.0)
            q = rng.uniform(0.0, TWO_PI, size=(quads, 4))
            o = s.origin
            before = _disk_log_cr(o, *q.T)
            img = [self.forward(q[:, i]) for i in range(4)]
            after = _disk_log_cr(o, *img)
            cr_err = float(np.max(np.abs(np.expm1(after - before))))
        else:
            inv_err = 0.0
            for p in grid.points:
                if not s.same_end(self.forward(self.inverse(p)), p):
                    inv_err = math.inf
            from circumext.boundary import log_cross_ratio

            cr_err = 0.0
            done = 0
            while done < quads:
                quad = [s.random_end(rng) for _ in range(4)]
                if any(s.same_end(quad[i], quad[j]) for i in range(4) for j in range(i + 1, 4)):
                    continue
                before = log_cross_ratio(s, s.origin, quad)
                after = log_cross_ratio(s, s.origin, [self.forward(p) for p in quad])
                cr_err = max(cr_err, abs(math.expm1(after - before)))
                done += 1
        rep = {"inverse_error": inv_err, "cross_ratio_error": cr_err,
               "passed": inv_err <= inverse_tol and cr_err <= cross_ratio_tol}
        if not rep["passed"]:
            self.validation = rep
            return self
        return MoebiusBoundaryMap(s, self.forward, self.inverse, self.description, self.derivative_hint,
                                  self.isometry, True, rep)


def three_point_log_derivative(f: MoebiusBoundaryMap, x, y, eta):
    """``log df_{rho_x, rho_y}(eta)`` from values of ``f`` at three points.

    For a Moebius map, ``D(e) = s'(e,a) s'(e,b) s(a,b) / (s(e,a) s(e,b) s'(a,b))``
    with ``s = rho_x`` and ``s'(u, v) = rho_y(f u, f v)``.  The disk uses
    ``a, b = e + 2pi/3, e + 4pi/3``; the tree uses ends starting with letters
    different from the first letter of ``e``.
    """
    s = f.space
    g = lambda p, u, v: s.gromov_product(p, u, v)
    if isinstance(s, DiskModel):
        e = np.asarray(getattr(eta, "angle", eta), dtype=float)
        a = e + THREE_POINT_OFFSETS[0]
        b = e + THREE_POINT_OFFSETS[1]
        fe, fa, fb = f.forward(e), f.forward(a), f.forward(b)
    else:
        e = eta
        first = e.letter(0)
        others = [c for c in range(s.q) if c != first][:2]
        a = s._tail((others[0],))
        b = s._tail((others[1],))
        fe, fa, fb = f.forward(e), f.forward(a), f.forward(b)
    # log of the quotient, written with Gromov products
    return (g(x, e, a) + g(x, e, b) - g(x, a, b)) - (g(y, fe, fa) + g(y, fe, fb) - g(y, fa, fb))


def map_derivative(f: MoebiusBoundaryMap, x, y, eta):
    """``df_{rho_x, rho_y}(eta) = lim_{xi -> eta} rho_y(f xi, f eta) / rho_x(xi, eta)``."""
    f.require_validated()
    return math.exp(float(f.log_derivative(x, y, eta)))


def limit_quotient_derivative(f: MoebiusBoundaryMap, x, y, eta, steps=(1e-3, 5e-4)):
    """Oracle for :func:`map_derivative` evaluating the defining quotient near ``eta``.

    Disk: geometric means of the quotients at offsets ``+d`` and ``-d`` are
    accurate to ``O(d^2)``; two step sizes are combined by extrapolation in
    ``d^2``.  Tree: the quotient is exact once the nearby end shares a long
    enough prefix with ``eta``.
    """
    s = f.space
    if isinstance(s, DiskModel):
        e = float(getattr(eta, "angle", eta))
        fe = float(f.forward(e))

        def q(d):
            out = 1.0
            for xi in (e + d, e - d):
                out *= s.visual(y, f.forward(xi), fe) / s.visual(x, xi, e)
            return math.sqrt(out)

        d1, d2 = steps
        return (d1 * d1 * q(d2) - d2 * d2 * q(d1)) / (d1 * d1 - d2 * d2)
    depth = max(len(eta.prefix), 4) + 24
    word = eta.head(depth)
    nxt = eta.letter(depth)
    alt = min(c for c in range(s.q) if c != word[-1] and c != nxt)
    xi = s._tail(word + (alt,))
    return s.visual(y, f.forward(xi), f.forward(eta)) / s.visual(x, xi, eta)


# ---------------------------------------------------------------------------
# Map families
# ---------------------------------------------------------------------------


def isometry_map(space, g) -> MoebiusBoundaryMap:
    """Boundary map of an isometry ``g``; ``log df_{rho_x,rho_y}(eta) = B(g x, y, g eta)``."""
    inv = g.inverse()
    hint = lambda x, y, eta: space.busemann(g.apply_point(x), y, g.apply_end(eta))
    return MoebiusBoundaryMap(space, g.apply_end, inv.apply_end, f"isometry {g!r}", hint, g)


def identity_map(space) -> MoebiusBoundaryMap:
    g = DiskIsometry.identity() if isinstance(space, DiskModel) else TreeIsometry.identity(space)
    f = isometry_map(space, g)
    f.description = "identity"
    return f


def corrupted_map(space, eps: float = 1e-3) -> MoebiusBoundaryMap:
    """Non-Moebius circle homeomorphism ``phi -> phi + eps sin(2 phi)`` (negative control)."""
    if not isinstance(space, DiskModel):
        raise ValueError("the corrupted control map is defined on the disk")
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 0.5) for the map to be a homeomorphism")

    def fwd(phi):
        phi = np.asarray(getattr(phi, "angle", phi), dtype=float)
        return canonical_angle(phi + eps * np.sin(2.0 * phi))

    def inv(psi):
        psi = np.asarray(getattr(psi, "angle", psi), dtype=float)
        phi = psi.copy()
        for _ in range(60):
            r = phi + eps * np.sin(2.0 * phi) - psi
            r = (r + math.pi) % TWO_PI - math.pi
            phi = phi - r / (1.0 + 2.0 * eps * np.cos(2.0 * phi))
        return canonical_angle(phi)

    return MoebiusBoundaryMap(space, fwd, inv, f"corrupted(eps={eps})")


def compose_maps(h: MoebiusBoundaryMap, f: MoebiusBoundaryMap) -> MoebiusBoundaryMap:
    """``h o f``; the derivative hint follows the chain rule through the base point."""
    s = f.space
    fwd = lambda xi: h.forward(f.forward(xi))
    inv = lambda xi: f.inverse(h.inverse(xi))
    hint = None
    if h.derivative_hint is not None and f.derivative_hint is not None:
        o = s.origin
        hint = lambda x, y, eta: f.derivative_hint(x, o, eta) + h.derivative_hint(o, y, f.forward(eta))
    iso = h.isometry.compose(f.isometry) if (h.isometry is not None and f.isometry is not None) else None
    return MoebiusBoundaryMap(s, fwd, inv, f"({h.description}) o ({f.description})", hint, iso)


# ---------------------------------------------------------------------------
# Conjugacy
# ---------------------------------------------------------------------------


def conjugacy(f: MoebiusBoundaryMap, g: GeodesicLine) -> GeodesicLine:
    """Image of ``g`` under the flow conjugacy induced by ``f``.

    With ``y0`` the projection of the origin to the image line, the foot is the
    point at signed distance ``-log df_{rho_x, rho_y0}(forward)`` from ``y0``,
    because ``df_{rho_x, rho_y}`` scales by ``exp(t)`` as ``y`` moves distance
    ``t`` toward ``f(forward)``.
    """
    f.require_validated()
    s = f.space
    line0 = s.line_between(f.forward(g.backward), f.forward(g.forward))
    t = f.log_derivative(g.foot, line0.foot, g.forward)
    if isinstance(s, DiskModel):
        t = float(t)
    return GeodesicLine(line0.backward, line0.forward, s.geodesic_point(line0, -t))


def conjugacy_foot_residual(f: MoebiusBoundaryMap, g: GeodesicLine, image: GeodesicLine) -> float:
    """``|log df_{rho_x, rho_y}(forward)|`` at the image foot ``y`` (zero when exact)."""
    return abs(float(f.log_derivative(g.foot, image.foot, g.forward)))


# ---------------------------------------------------------------------------
# Flow sets
# ---------------------------------------------------------------------------


@dataclass
class FlowSet:
    """Finite set ``K`` of flow elements.

    ``family`` optionally describes the continuum that the finite set samples:
    a vectorized map from fan angles to the vectors ``W(theta)`` with
    ``exp B(z, foot, forward) = -<Z, W(theta)>`` (disk only).  ``fan_size``
    records the discretization.
    """

    space: object
    elements: list
    family: Callable | None = None
    fan_size: int = 0
    label: str = ""

    def __post_init__(self):
        if not self.elements:
            raise ValueError("a flow set must be nonempty")

    @property
    def endpoints(self) -> list:
        return [g.forward for g in self.elements]

    @property
    def singleton_endpoint(self) -> bool:
        e = self.endpoints
        return all(self.space.same_end(e[0], p) for p in e[1:])

    def flowed(self, t) -> "FlowSet":
        return FlowSet(self.space, [flow(self.space, g, t) for g in self.elements], None, self.fan_size, self.label)

    def feet(self) -> list:
        return [g.foot for g in self.elements]


def fan_set(space, x, n: int) -> FlowSet:
    """Direction fan at ``x`` as a flow set; disk fans carry their continuum family."""
    lines = space.direction_fan(x, n)
    if not isinstance(space, DiskModel):
        return FlowSet(space, lines, None, n, f"fan(n={n})")
    move = DiskIsometry.translation(x)
    X = x.hyperboloid

    def family(theta):
        N = null_vector(move.apply_angles(theta))
        return N / (-lorentz_dot(X[None, :], N))[:, None]

    return FlowSet(space, lines, family, n, f"fan(n={n})")


def conjugated_fan(f: MoebiusBoundaryMap, x, n: int) -> FlowSet:
    """``phi_f`` applied to the direction fan at ``x``.

    For the disk the continuum family is
    ``W(theta) = N_{f(xi_theta)} / df_{rho_x, rho_o}(xi_theta)``, since the
    conjugated foot ``y`` satisfies ``-<Y, N_{f xi}> = df_{rho_x, rho_o}(xi)``.
    """
    f.require_validated()
    s = f.space
    lines = [conjugacy(f, g) for g in s.direction_fan(x, n)]
    family = conjugated_family(f, x) if isinstance(s, DiskModel) else None
    return FlowSet(s, lines, family, n, f"conjugated fan(n={n}, map={f.description})")


def conjugated_family(f: MoebiusBoundaryMap, x):
    """Vectorized ``theta -> W(theta)`` for the conjugated fan at ``x`` (disk)."""
    s = f.space
    move = DiskIsometry.translation(x)
    o = s.origin

    def family(theta):
        xi = move.apply_angles(np.asarray(theta, dtype=float))
        N = null_vector(f.forward(xi))
        return N * np.exp(-np.asarray(f.log_derivative(x, o, xi), dtype=float))[:, None]

    return family


def random_flow_set(space, rng, n: int = 128, radius: float = 2.0, jitter: float = 0.5) -> FlowSet:
    """Lines with random forward directions at a random point, feet flowed by random times."""
    x = space.random_point(rng, radius)
    elements = []
    for _ in range(n):
        g = space.line_through(x, space.random_end(rng))
        elements.append(flow(space, g, float(rng.uniform(-jitter, jitter))))
    return FlowSet(space, elements, None, n, f"random(n={n})")


def disk_functional(space, g: GeodesicLine) -> np.ndarray:
    """``W`` with ``exp B(z, foot, forward) = -<Z, W>`` for the disk."""
    N = null_vector(g.forward.angle)
    return N / (-lorentz_dot(g.foot.hyperboloid, N))
