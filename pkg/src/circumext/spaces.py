"""Concrete CAT(-1) model spaces.

Two models share one interface:

* :class:`DiskModel` -- the hyperbolic disk of curvature ``-k**2``.  Points
  are stored in hyperbolic polar coordinates ``(r, theta)`` about the origin
  (``r`` in the curvature -1 normalization) so that points far out near the
  boundary keep full precision.  Isometries act through the hyperboloid
  (Lorentz) model.
* :class:`TreeModel` -- the ``q``-regular simplicial tree with rational edge
  length.  Vertices are reduced words over ``range(q)`` (no letter repeated
  twice in a row); boundary points are eventually periodic reduced words.
  All metric quantities are exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from circumext.errors import DomainError

TWO_PI = 2.0 * math.pi
BOUNDARY_CLAMP = 1e-12
LORENTZ_J = np.diag([-1.0, 1.0, 1.0])


def canonical_angle(a):
    """Reduce an angle (or array of angles) to ``[0, 2*pi)``."""
    out = np.mod(a, TWO_PI)
    out = np.where(out >= TWO_PI, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


def lorentz_dot(a, b):
    """Minkowski form ``-a0*b0 + a1*b1 + a2*b2`` along the last axis."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return -a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def null_vector(angle):
    """Future null vector ``(1, cos a, sin a)`` representing a disk boundary point."""
    angle = np.asarray(angle, dtype=float)
    return np.stack([np.ones_like(angle), np.cos(angle), np.sin(angle)], axis=-1)


# ---------------------------------------------------------------------------
# Points, ends and lines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiskPoint:
    """Interior point of the disk in hyperbolic polar coordinates.

    ``r`` is the distance to the origin in the curvature -1 normalization and
    ``theta`` the polar angle, canonicalized to ``[0, 2*pi)``.
    """

    r: float
    theta: float = 0.0

    def __post_init__(self):
        r = float(self.r)
        theta = float(self.theta)
        if not (math.isfinite(r) and math.isfinite(theta)) or r < 0.0:
            raise DomainError(f"invalid polar coordinates ({self.r}, {self.theta})")
        theta = canonical_angle(theta) if r > 0.0 else 0.0
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_coords(cls, u: float, v: float) -> "DiskPoint":
        n = math.hypot(u, v)
        if not (math.isfinite(n) and n < 1.0 - BOUNDARY_CLAMP):
            raise DomainError(f"point ({u}, {v}) is not inside the disk")
        return cls(2.0 * math.atanh(n), math.atan2(v, u))

    @classmethod
    def from_hyperboloid(cls, X) -> "DiskPoint":
        return cls(math.asinh(math.hypot(X[1], X[2])), math.atan2(X[2], X[1]))

    @property
    def coords(self) -> tuple[float, float]:
        t = math.tanh(self.r / 2.0)
        return (t * math.cos(self.theta), t * math.sin(self.theta))

    @property
    def hyperboloid(self) -> np.ndarray:
        sh = math.sinh(self.r)
        return np.array([math.cosh(self.r), sh * math.cos(self.theta), sh * math.sin(self.theta)])


@dataclass(frozen=True)
class DiskEnd:
    """Boundary point of the disk, given by its angle on the unit circle."""

    angle: float

    def __post_init__(self):
        a = float(self.angle)
        if not math.isfinite(a):
            raise DomainError(f"invalid boundary angle {self.angle}")
        object.__setattr__(self, "angle", canonical_angle(a))

    @property
    def null(self) -> np.ndarray:
        return null_vector(self.angle)


@dataclass(frozen=True)
class TreePoint:
    """Point of a regular tree: a vertex word plus an offset toward the parent.

    ``offset`` is the distance from the vertex ``word`` along the edge toward
    ``word[:-1]``; it lies in ``[0, edge_length)`` and is zero for the root.
    """

    word: tuple = ()
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(a) for a in self.word))
        object.__setattr__(self, "offset", Fraction(self.offset))
        if self.offset < 0 or (not self.word and self.offset != 0):
            raise DomainError(f"invalid edge offset {self.offset} at {self.word}")


@dataclass(frozen=True)
class TreeEnd:
    """Eventually periodic reduced infinite word ``prefix + period + period + ...``."""

    prefix: tuple = ()
    period: tuple = (0, 1)

    def __post_init__(self):
        prefix = tuple(int(a) for a in self.prefix)
        period = tuple(int(a) for a in self.period)
        if not period:
            raise DomainError("boundary word needs a nonempty period")
        n = len(period)
        for d in range(1, n + 1):
            if n % d == 0 and period == period[:d] * (n // d):
                period = period[:d]
                break
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = (period[-1],) + period[:-1]
        word = prefix + period + period[:1]
        if any(a == b for a, b in zip(word, word[1:])):
            raise DomainError(f"boundary word {prefix}{period}* backtracks")
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    def letter(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def head(self, n: int) -> tuple:
        return tuple(self.letter(i) for i in range(n))


@dataclass(frozen=True)
class GeodesicLine:
    """Bi-infinite geodesic with a marked time-zero foot point."""

    backward: object
    forward: object
    foot: object


@dataclass(frozen=True)
class SampleGrid:
    """Finite sample of the boundary standing in for a supremum over it."""

    n: int
    points: object
    refinement: int = 60

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("sample grids need at least 16 boundary points")


# ---------------------------------------------------------------------------
# Disk model
# ---------------------------------------------------------------------------


def _angle_of(xi):
    if isinstance(xi, DiskEnd):
        return xi.angle
    return xi


def _sinh2_half(r1, t1, r2, t2):
    return np.sinh((r1 - r2) / 2.0) ** 2 + np.sinh(r1) * np.sinh(r2) * np.sin((t1 - t2) / 2.0) ** 2


def horo_weight(r, theta, phi):
    """``-<X, N_phi>`` for the point ``(r, theta)``: ``exp`` of its horofunction.

    Written as ``e^{-r} + 2 sinh r sin^2((theta - phi)/2)`` to stay accurate far
    from the origin.
    """
    return np.exp(-r) + 2.0 * np.sinh(r) * np.sin((theta - phi) / 2.0) ** 2


class ModelSpace:
    """Shared surface of the concrete models."""

    kind = "abstract"

    def distance(self, x, y):
        raise NotImplementedError

    def busemann(self, x, y, xi):
        raise NotImplementedError

    def gromov_product(self, x, xi, eta):
        raise NotImplementedError

    def visual(self, x, xi, eta):
        raise NotImplementedError

    def same_end(self, xi, eta) -> bool:
        raise NotImplementedError


class DiskModel(ModelSpace):
    """Hyperbolic disk of constant curvature ``-k**2`` (``k >= 1``)."""

    kind = "disk"

    def __init__(self, k: float = 1.0):
        if not k >= 1.0:
            raise DomainError("disk curvature scale must satisfy k >= 1")
        self.k = float(k)
        self.origin = DiskPoint(0.0, 0.0)

    def __repr__(self):
        return f"DiskModel(k={self.k})"

    def __eq__(self, other):
        return isinstance(other, DiskModel) and other.k == self.k

    def __hash__(self):
        return hash(("disk", self.k))

    def describe(self) -> dict:
        return {"kind": "disk", "k": self.k}

    # -- constructors -------------------------------------------------------

    def point(self, u: float, v: float) -> DiskPoint:
        return DiskPoint.from_coords(u, v)

    def polar(self, r: float, theta: float = 0.0) -> DiskPoint:
        """Point at distance ``r`` (in this model's metric) from the origin."""
        return DiskPoint(self.k * r, theta)

    def end(self, angle: float) -> DiskEnd:
        return DiskEnd(angle)

    def check_point(self, x):
        if not isinstance(x, DiskPoint):
            raise DomainError(f"{x!r} is not a disk point")
        return x

    def same_end(self, xi, eta) -> bool:
        d = abs(canonical_angle(_angle_of(xi)) - canonical_angle(_angle_of(eta)))
        return min(d, TWO_PI - d) < 1e-15

    # -- metric ---------------------------------------------------------------

    def distance(self, x: DiskPoint, y: DiskPoint) -> float:
        self.check_point(x)
        self.check_point(y)
        s2 = _sinh2_half(x.r, x.theta, y.r, y.theta)
        return 2.0 * math.asinh(math.sqrt(s2)) / self.k

    def horofunction(self, x: DiskPoint, xi):
        """``lim d(x, a) - d(o, a)`` as ``a`` tends to ``xi``."""
        return np.log(horo_weight(x.r, x.theta, _angle_of(xi))) / self.k

    def busemann(self, x: DiskPoint, y: DiskPoint, xi):
        phi = _angle_of(xi)
        return (np.log(horo_weight(x.r, x.theta, phi)) - np.log(horo_weight(y.r, y.theta, phi))) / self.k

    def gromov_product(self, x: DiskPoint, xi, eta):
        a, b = _angle_of(xi), _angle_of(eta)
        s = np.abs(np.sin((a - b) / 2.0))
        if np.any(s == 0.0):
            raise ValueError("Gromov product of a boundary point with itself diverges")
        g = -np.log(s) + 0.5 * (np.log(horo_weight(x.r, x.theta, a)) + np.log(horo_weight(x.r, x.theta, b)))
        return g / self.k

    def visual(self, x: DiskPoint, xi, eta):
        a, b = _angle_of(xi), _angle_of(eta)
        s = np.abs(np.sin((a - b) / 2.0))
        rho = s / np.sqrt(horo_weight(x.r, x.theta, a) * horo_weight(x.r, x.theta, b))
        return rho ** (1.0 / self.k)

    # -- geodesics --------------------------------------------------------------

    def frame(self, x: DiskPoint, xi) -> tuple[np.ndarray, np.ndarray]:
        """Hyperboloid position of ``x`` and the unit tangent pointing at ``xi``."""
        X = x.hyperboloid
        N = null_vector(_angle_of(xi))
        V = N / (-lorentz_dot(X, N)) - X
        return X, V

    def ray_point(self, x: DiskPoint, xi, t: float) -> DiskPoint:
        if t < 0:
            raise ValueError("ray parameter must be nonnegative")
        X, V = self.frame(x, xi)
        s = self.k * t
        return DiskPoint.from_hyperboloid(math.cosh(s) * X + math.sinh(s) * V)

    def opposite_end(self, x: DiskPoint, xi) -> DiskEnd:
        """Backward endpoint of the line through ``x`` heading to ``xi``."""
        alpha = _angle_of(xi) - x.theta
        half = alpha / 2.0
        c = math.cos(half)
        s = math.sin(half)
        return DiskEnd(x.theta - 2.0 * math.atan2(math.exp(-2.0 * x.r) * c, s))

    def line_through(self, x: DiskPoint, xi) -> GeodesicLine:
        xi = DiskEnd(_angle_of(xi))
        return GeodesicLine(self.opposite_end(x, xi), xi, x)

    def line_between(self, backward, forward, near: DiskPoint | None = None) -> GeodesicLine:
        """Line with the given endpoints, footed at the projection of ``near``."""
        backward = DiskEnd(_angle_of(backward))
        forward = DiskEnd(_angle_of(forward))
        if self.same_end(backward, forward):
            raise ValueError("a geodesic line needs two distinct endpoints")
        near = self.origin if near is None else near
        return GeodesicLine(backward, forward, self.project_to_line(backward, forward, near))

    def project_to_line(self, backward, forward, z: DiskPoint) -> DiskPoint:
        Np = null_vector(_angle_of(forward))
        Nm = null_vector(_angle_of(backward))
        Z = z.hyperboloid
        c = -1.0 / (2.0 * lorentz_dot(Np, Nm))
        a = math.sqrt(c * (-lorentz_dot(Z, Nm)) / (-lorentz_dot(Z, Np)))
        return DiskPoint.from_hyperboloid(a * Np + (c / a) * Nm)

    def geodesic_point(self, line: GeodesicLine, t: float) -> DiskPoint:
        X, V = self.frame(line.foot, line.forward)
        s = self.k * t
        return DiskPoint.from_hyperboloid(math.cosh(s) * X + math.sinh(s) * V)

    def line_defect(self, line: GeodesicLine) -> float:
        """Angular mismatch between the stored and implied backward endpoints."""
        implied = self.opposite_end(line.foot, line.forward).angle
        d = abs(implied - line.backward.angle)
        return min(d, TWO_PI - d)

    def direction_fan(self, x: DiskPoint, n: int) -> list[GeodesicLine]:
        """``n`` lines footed at ``x`` whose forward ends are visually equidistributed.

        The symmetric fan at the origin is carried to ``x`` by the translation
        moving the origin to ``x``.
        """
        if n < 4:
            raise ValueError("a disk direction fan needs n >= 4")
        move = DiskIsometry.translation(x)
        base = TWO_PI * np.arange(n) / n
        fwd = move.apply_angles(base)
        bwd = move.apply_angles(base + math.pi)
        return [GeodesicLine(DiskEnd(b), DiskEnd(f), x) for f, b in zip(fwd, bwd)]

    # -- sampling -------------------------------------------------------------

    def grid(self, n: int = 256, center: DiskPoint | None = None) -> SampleGrid:
        """``n`` ends equally spaced as seen from ``center`` (default the origin)."""
        angles = TWO_PI * np.arange(n) / n
        if center is not None:
            angles = DiskIsometry.translation(center).apply_angles(angles)
        return SampleGrid(n, angles)

    def random_point(self, rng, radius: float = 3.0) -> DiskPoint:
        """Point drawn from hyperbolic area measure on the ball of given radius."""
        R = self.k * radius
        u = rng.random()
        r = math.acosh(1.0 + u * (math.cosh(R) - 1.0))
        return DiskPoint(r, TWO_PI * rng.random())

    def random_end(self, rng) -> DiskEnd:
        return DiskEnd(TWO_PI * rng.random())

    def random_line(self, rng, radius: float = 3.0) -> GeodesicLine:
        return self.line_through(self.random_point(rng, radius), self.random_end(rng))

    def random_isometry(self, rng, radius: float = 3.0, reflect: bool = False) -> "DiskIsometry":
        g = DiskIsometry.translation(self.random_point(rng, radius)).compose(
            DiskIsometry.rotation(TWO_PI * rng.random())
        )
        if reflect and rng.random() < 0.5:
            g = g.compose(DiskIsometry.reflection())
        return g

    def point_to_json(self, x: DiskPoint) -> dict:
        u, v = x.coords
        return {"r": x.r, "theta": x.theta, "u": u, "v": v}

    def end_to_json(self, xi) -> float:
        return float(canonical_angle(_angle_of(xi)))


class DiskIsometry:
    """Isometry of the disk as a matrix in ``O+(2,1)``.

    Only moderately large translations are expected; boundary actions are
    computed from the Lorentz matrix directly.
    """

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)

    @classmethod
    def identity(cls):
        return cls(np.eye(3))

    @classmethod
    def rotation(cls, alpha: float):
        c, s = math.cos(alpha), math.sin(alpha)
        return cls([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])

    @classmethod
    def boost(cls, s: float):
        """Translation along the real axis moving the origin to polar ``(s, 0)``."""
        ch, sh = math.cosh(s), math.sinh(s)
        return cls([[ch, sh, 0.0], [sh, ch, 0.0], [0.0, 0.0, 1.0]])

    @classmethod
    def reflection(cls):
        return cls(np.diag([1.0, 1.0, -1.0]))

    @classmethod
    def translation(cls, x: DiskPoint):
        """Transvection along the line through the origin and ``x``, moving origin to ``x``."""
        return cls.rotation(x.theta).compose(cls.boost(x.r)).compose(cls.rotation(-x.theta))

    def compose(self, other: "DiskIsometry") -> "DiskIsometry":
        """``self`` after ``other``."""
        return DiskIsometry(self.matrix @ other.matrix)

    def inverse(self) -> "DiskIsometry":
        return DiskIsometry(LORENTZ_J @ self.matrix.T @ LORENTZ_J)

    def apply_point(self, x: DiskPoint) -> DiskPoint:
        return DiskPoint.from_hyperboloid(self.matrix @ x.hyperboloid)

    def apply_angles(self, angles):
        N = null_vector(angles) @ self.matrix.T
        return canonical_angle(np.arctan2(N[..., 2], N[..., 1]))

    def apply_end(self, xi):
        if isinstance(xi, DiskEnd):
            return DiskEnd(self.apply_angles(xi.angle))
        return self.apply_angles(xi)

    def apply_line(self, line: GeodesicLine) -> GeodesicLine:
        return GeodesicLine(self.apply_end(line.backward), self.apply_end(line.forward), self.apply_point(line.foot))

    def __repr__(self):
        return f"DiskIsometry({self.matrix.tolist()})"


# ---------------------------------------------------------------------------
# Regular tree
# ---------------------------------------------------------------------------


class TreeModel(ModelSpace):
    """The ``q``-regular tree with every edge of length ``edge_length``.

    Vertices are the reduced words over ``range(q)``; word ``w + (a,)`` is a
    child of ``w``.  ``depth_cap`` bounds enumeration depth (direction fans,
    cylinder grids); comparisons between boundary words are exact.
    """

    kind = "tree"

    def __init__(self, q: int = 3, edge_length=1, depth_cap: int = 64):
        if int(q) != q or q < 3:
            raise DomainError("tree branching must be an integer q >= 3")
        self.q = int(q)
        self.edge_length = Fraction(edge_length)
        if self.edge_length <= 0:
            raise DomainError("edge length must be positive")
        self.depth_cap = int(depth_cap)
        self.origin = TreePoint((), 0)

    def __repr__(self):
        return f"TreeModel(q={self.q}, edge_length={self.edge_length})"

    def __eq__(self, other):
        return isinstance(other, TreeModel) and (other.q, other.edge_length) == (self.q, self.edge_length)

    def __hash__(self):
        return hash(("tree", self.q, self.edge_length))

    def describe(self) -> dict:
        return {"kind": "tree", "q": self.q, "edge_length": str(self.edge_length)}

    # -- validation -------------------------------------------------------------

    def _check_word(self, word):
        for a in word:
            if not 0 <= a < self.q:
                raise DomainError(f"letter {a} outside range({self.q})")
        if any(a == b for a, b in zip(word, word[1:])):
            raise DomainError(f"word {word} is not reduced")

    def check_point(self, x):
        if not isinstance(x, TreePoint):
            raise DomainError(f"{x!r} is not a tree point")
        self._check_word(x.word)
        if x.offset >= self.edge_length:
            raise DomainError(f"offset {x.offset} exceeds the edge length")
        return x

    def check_end(self, xi):
        if not isinstance(xi, TreeEnd):
            raise DomainError(f"{xi!r} is not a tree end")
        self._check_word(xi.prefix + xi.period)
        return xi

    def point(self, word=(), offset=0) -> TreePoint:
        return self.check_point(TreePoint(tuple(word), Fraction(offset)))

    def end(self, prefix=(), period=(0, 1)) -> TreeEnd:
        return self.check_end(TreeEnd(tuple(prefix), tuple(period)))

    # -- combinatorics -----------------------------------------------------------

    def height(self, x: TreePoint) -> Fraction:
        return len(x.word) * self.edge_length - x.offset

    @staticmethod
    def common_prefix(xi: TreeEnd, eta: TreeEnd) -> int | None:
        """Length of the common prefix of two ends, ``None`` if they are equal."""
        bound = max(len(xi.prefix), len(eta.prefix)) + math.lcm(len(xi.period), len(eta.period))
        for i in range(bound):
            if xi.letter(i) != eta.letter(i):
                return i
        return None

    @staticmethod
    def _word_end_prefix(word, xi: TreeEnd) -> int:
        for i, a in enumerate(word):
            if xi.letter(i) != a:
                return i
        return len(word)

    def same_end(self, xi, eta) -> bool:
        return self.common_prefix(xi, eta) is None

    def _point_on_word(self, word, h: Fraction) -> TreePoint:
        """Point at height ``h`` on the path from the root to vertex ``word``."""
        if h <= 0:
            return TreePoint((), 0)
        n = math.ceil(h / self.edge_length)
        return TreePoint(tuple(word[:n]), n * self.edge_length - h)

    def _point_on_end(self, xi: TreeEnd, h: Fraction) -> TreePoint:
        if h <= 0:
            return TreePoint((), 0)
        n = math.ceil(h / self.edge_length)
        return TreePoint(xi.head(n), n * self.edge_length - h)

    # -- metric -----------------------------------------------------------------

    def distance(self, x: TreePoint, y: TreePoint) -> Fraction:
        self.check_point(x)
        self.check_point(y)
        hx, hy = self.height(x), self.height(y)
        c = 0
        for a, b in zip(x.word, y.word):
            if a != b:
                break
            c += 1
        if c == len(x.word) or c == len(y.word):
            return abs(hx - hy)
        return hx + hy - 2 * c * self.edge_length

    def horofunction(self, x: TreePoint, xi: TreeEnd) -> Fraction:
        c = self._word_end_prefix(x.word, xi)
        h = self.height(x)
        if c == len(x.word):
            return -h
        return h - 2 * c * self.edge_length

    def busemann(self, x: TreePoint, y: TreePoint, xi: TreeEnd) -> Fraction:
        return self.horofunction(x, xi) - self.horofunction(y, xi)

    def gromov_product(self, x: TreePoint, xi: TreeEnd, eta: TreeEnd) -> Fraction:
        c = self.common_prefix(xi, eta)
        if c is None:
            raise ValueError("Gromov product of a boundary point with itself diverges")
        return c * self.edge_length + (self.horofunction(x, xi) + self.horofunction(x, eta)) / 2

    def visual(self, x: TreePoint, xi: TreeEnd, eta: TreeEnd) -> float:
        if self.same_end(xi, eta):
            return 0.0
        return math.exp(-float(self.gromov_product(x, xi, eta)))

    # -- geodesics ----------------------------------------------------------------

    def ray_point(self, x: TreePoint, xi: TreeEnd, t) -> TreePoint:
        t = Fraction(t)
        if t < 0:
            raise ValueError("ray parameter must be nonnegative")
        c = self._word_end_prefix(x.word, xi)
        h = self.height(x)
        if c == len(x.word):
            return self._point_on_end(xi, h + t)
        up = h - c * self.edge_length
        if t <= up:
            return self._point_on_word(x.word, h - t)
        return self._point_on_end(xi, c * self.edge_length + (t - up))

    def _line_coordinate(self, line: GeodesicLine, z: TreePoint) -> Fraction:
        c = self.common_prefix(line.backward, line.forward)
        if c is None:
            raise ValueError("a geodesic line needs two distinct endpoints")
        top = c * self.edge_length
        h = self.height(z)
        if h >= top and self._word_end_prefix(z.word, line.forward) == len(z.word):
            return h - top
        if h >= top and self._word_end_prefix(z.word, line.backward) == len(z.word):
            return top - h
        raise DomainError(f"{z} does not lie on the line {line}")

    def geodesic_point(self, line: GeodesicLine, t) -> TreePoint:
        c = self.common_prefix(line.backward, line.forward)
        sigma = self._line_coordinate(line, line.foot) + Fraction(t)
        top = c * self.edge_length
        if sigma >= 0:
            return self._point_on_end(line.forward, top + sigma)
        return self._point_on_end(line.backward, top - sigma)

    def line_defect(self, line: GeodesicLine) -> float:
        try:
            self._line_coordinate(line, line.foot)
        except DomainError:
            return math.inf
        return 0.0

    def _tail(self, word) -> TreeEnd:
        last = word[-1] if word else None
        b = min(a for a in range(self.q) if a != last)
        c = min(a for a in range(self.q) if a != b)
        return TreeEnd(tuple(word), (b, c))

    def _extend_away(self, u, prev) -> TreeEnd:
        """Canonical end through ``u`` that does not return to ``prev``."""
        if prev is None or len(u) > len(prev):
            return self._tail(u)
        last = u[-1] if u else None
        a = min(b for b in range(self.q) if b != prev[-1] and b != last)
        return self._tail(tuple(u) + (a,))

    def _first_steps(self, x: TreePoint):
        """Neighbouring vertices of ``x`` as ``(vertex, vertex we came from)`` pairs.

        For a point inside an edge the "previous" vertex is the far end of
        that edge, so continuing away from it never backtracks through ``x``.
        """
        w = x.word
        if x.offset != 0:
            return [(w, w[:-1]), (w[:-1], w)]
        steps = []
        if w:
            steps.append((w[:-1], w))
        last = w[-1] if w else None
        steps.extend((w + (a,), w) for a in range(self.q) if a != last)
        return steps

    def _first_vertex(self, x: TreePoint, xi: TreeEnd):
        w = x.word
        c = self._word_end_prefix(w, xi)
        if x.offset != 0:
            return w if c == len(w) else w[:-1]
        if c == len(w):
            return w + (xi.letter(len(w)),)
        return w[:-1]

    def line_through(self, x: TreePoint, xi: TreeEnd) -> GeodesicLine:
        first = self._first_vertex(x, xi)
        for v, prev in self._first_steps(x):
            if v != first:
                back = self._extend_away(v, prev)
                return GeodesicLine(back, xi, x)
        raise DomainError("no second direction at this point")

    def line_between(self, backward, forward, near=None) -> GeodesicLine:
        c = self.common_prefix(backward, forward)
        if c is None:
            raise ValueError("a geodesic line needs two distinct endpoints")
        foot = TreePoint(forward.head(c), 0)
        line = GeodesicLine(backward, forward, foot)
        if near is None:
            return line
        return GeodesicLine(backward, forward, self.project_to_line(backward, forward, near))

    def project_to_line(self, backward, forward, z: TreePoint) -> TreePoint:
        """Closest point of the line to ``z``: equalize the two Busemann heights."""
        line = self.line_between(backward, forward)
        # B(z, ., forward) + B(z, ., backward) is minimal on the projection.
        hf = self.busemann(line.foot, z, forward)
        hb = self.busemann(line.foot, z, backward)
        return self.geodesic_point(line, (hf - hb) / 2)

    def _paths(self, x: TreePoint, m: int):
        frontier = self._first_steps(x)
        for _ in range(m - 1):
            nxt = []
            for v, prev in frontier:
                last = v[-1] if v else None
                options = []
                if v and v[:-1] != prev:
                    options.append((v[:-1], v))
                for a in range(self.q):
                    child = v + (a,)
                    if a != last and child != prev:
                        options.append((child, v))
                nxt.extend(options)
            frontier = nxt
        return frontier

    def direction_fan(self, x: TreePoint, n: int) -> list[GeodesicLine]:
        """``n`` lines footed at ``x`` with spread-out forward ends.

        Forward ends extend the non-backtracking paths of a fixed combinatorial
        length from ``x``; the length is the smallest one (up to the depth cap)
        giving at least ``n`` paths, which are then subsampled evenly.
        """
        if n < 2:
            raise ValueError("a tree direction fan needs n >= 2")
        self.check_point(x)
        for m in range(1, self.depth_cap + 1):
            paths = self._paths(x, m)
            if len(paths) >= n:
                break
        else:
            raise ValueError(f"fewer than {n} directions within depth cap {self.depth_cap}")
        paths.sort()
        picks = [paths[(j * len(paths)) // n] for j in range(n)]
        ends = [self._extend_away(v, prev) for v, prev in picks]
        return [self.line_through(x, xi) for xi in ends]

    # -- sampling ---------------------------------------------------------------

    def words(self, depth: int):
        out = [()]
        for _ in range(depth):
            out = [w + (a,) for w in out for a in range(self.q) if not w or a != w[-1]]
        return out

    def grid(self, depth: int = 4) -> SampleGrid:
        """One canonical end per cylinder of the given depth (seen from the root)."""
        ends = tuple(self._tail(w) for w in self.words(depth))
        return SampleGrid(len(ends), ends)

    def random_word(self, rng, length: int) -> tuple:
        word = []
        for _ in range(length):
            choices = [a for a in range(self.q) if not word or a != word[-1]]
            word.append(int(rng.choice(choices)))
        return tuple(word)

    def random_point(self, rng, radius: int = 3) -> TreePoint:
        length = int(rng.integers(0, int(radius) + 1))
        word = self.random_word(rng, length)
        offset = self.edge_length * Fraction(int(rng.integers(0, 4)), 4) if word else Fraction(0)
        return TreePoint(word, offset)

    def random_end(self, rng) -> TreeEnd:
        while True:
            prefix = self.random_word(rng, int(rng.integers(0, 6)))
            period = self.random_word(rng, int(rng.integers(2, 5)))
            try:
                return self.check_end(TreeEnd(prefix, period))
            except DomainError:
                continue

    def random_line(self, rng, radius: int = 3) -> GeodesicLine:
        return self.line_through(self.random_point(rng, radius), self.random_end(rng))

    def random_isometry(self, rng, length: int = 3) -> "TreeIsometry":
        ops = []
        for _ in range(length):
            ops.append(("mul", int(rng.integers(0, self.q))))
        ops.append(("perm", tuple(int(a) for a in rng.permutation(self.q))))
        return TreeIsometry(self, tuple(ops))

    def point_to_json(self, x: TreePoint) -> dict:
        return {"word": list(x.word), "offset": str(x.offset)}

    def end_to_json(self, xi: TreeEnd) -> dict:
        return {"prefix": list(xi.prefix), "period": list(xi.period)}


@dataclass(frozen=True)
class TreeIsometry:
    """Tree automorphism composed of letter permutations and letter multiplications.

    ``("perm", p)`` relabels every letter ``a`` as ``p[a]``; ``("mul", a)`` is left
    multiplication by the generator ``a`` of the free product of ``q`` copies of
    Z/2, whose Cayley graph is the tree.  Operations apply left to right.
    """

    space: TreeModel
    ops: tuple = field(default=())

    @classmethod
    def identity(cls, space):
        return cls(space, ())

    def compose(self, other: "TreeIsometry") -> "TreeIsometry":
        """``self`` after ``other``."""
        return TreeIsometry(self.space, other.ops + self.ops)

    def inverse(self) -> "TreeIsometry":
        inv = []
        for kind, arg in reversed(self.ops):
            if kind == "perm":
                p = [0] * len(arg)
                for i, a in enumerate(arg):
                    p[a] = i
                inv.append(("perm", tuple(p)))
            else:
                inv.append((kind, arg))
        return TreeIsometry(self.space, tuple(inv))

    def _mul_word(self, a, w):
        return w[1:] if w and w[0] == a else (a,) + w

    def apply_point(self, x: TreePoint) -> TreePoint:
        ell = self.space.edge_length
        word, off = x.word, x.offset
        for kind, arg in self.ops:
            if kind == "perm":
                word = tuple(arg[c] for c in word)
                continue
            if off == 0:
                word = self._mul_word(arg, word)
                continue
            child = self._mul_word(arg, word)
            parent = self._mul_word(arg, word[:-1])
            if len(child) > len(parent):
                word = child
            else:
                word, off = parent, ell - off
        return TreePoint(word, off)

    def apply_end(self, xi: TreeEnd) -> TreeEnd:
        prefix, period = xi.prefix, xi.period
        for kind, arg in self.ops:
            if kind == "perm":
                prefix = tuple(arg[c] for c in prefix)
                period = tuple(arg[c] for c in period)
            elif prefix and prefix[0] == arg:
                prefix = prefix[1:]
            elif not prefix and period[0] == arg:
                period = period[1:] + period[:1]
            else:
                prefix = (arg,) + prefix
            prefix, period = TreeEnd(prefix, period).prefix, TreeEnd(prefix, period).period
        return TreeEnd(prefix, period)

    def apply_line(self, line: GeodesicLine) -> GeodesicLine:
        return GeodesicLine(self.apply_end(line.backward), self.apply_end(line.forward), self.apply_point(line.foot))


def distinct_ends(space, ends: Sequence) -> bool:
    """True when no two of the given boundary points coincide."""
    return not any(space.same_end(a, b) for a, b in itertools.combinations(ends, 2))
