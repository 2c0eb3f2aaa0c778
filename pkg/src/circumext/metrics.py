"""Moebius metrics on the boundary, stored as log-densities against a visual base.

A metric ``rho`` Moebius equivalent to the base visual metric ``rho_o`` is
determined by its log-derivative ``lam = log(d rho / d rho_o)`` through the
geometric mean value identity

    rho(xi, eta) = rho_o(xi, eta) * exp((lam(xi) + lam(eta)) / 2).

Disk log-densities are vectorized functions of boundary angles.  Tree
log-densities take one :class:`~circumext.spaces.TreeEnd` at a time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from circumext.errors import ValidationError
from circumext.spaces import TWO_PI, DiskModel, SampleGrid, canonical_angle

REFINE_TOP = 6
REFINE_XTOL = 1e-12


# ---------------------------------------------------------------------------
# Suprema over the boundary
# ---------------------------------------------------------------------------


def _circle_sup(fn, grid_angles, top=REFINE_TOP):
    vals = np.asarray(fn(grid_angles), dtype=float)
    n = len(vals)
    h = TWO_PI / n
    peaks = np.flatnonzero((vals >= np.roll(vals, 1)) & (vals >= np.roll(vals, -1)))
    if len(peaks) == 0:
        peaks = np.array([int(np.argmax(vals))])
    peaks = peaks[np.argsort(vals[peaks])[::-1][:top]]
    best_val = float(vals.max())
    best_arg = float(grid_angles[int(np.argmax(vals))])
    for i in peaks:
        c = float(grid_angles[i])
        res = minimize_scalar(
            lambda t: -float(fn(np.array([t]))[0]),
            bounds=(c - h, c + h),
            method="bounded",
            options={"xatol": REFINE_XTOL},
        )
        if -res.fun > best_val:
            best_val, best_arg = float(-res.fun), float(res.x)
    return best_val, canonical_angle(best_arg)


def sup_over_boundary(space, fn, grid: SampleGrid):
    """Supremum of ``fn`` over the boundary and a point attaining it.

    Disk: grid maximum followed by bounded scalar refinement around the best
    local maxima.  Tree: exact maximum over the grid's cylinder representatives.
    """
    if isinstance(space, DiskModel):
        return _circle_sup(fn, np.asarray(grid.points, dtype=float))
    vals = [float(fn(xi)) for xi in grid.points]
    i = int(np.argmax(vals))
    return vals[i], grid.points[i]


def inf_over_boundary(space, fn, grid: SampleGrid):
    if isinstance(space, DiskModel):
        v, a = _circle_sup(lambda t: -np.asarray(fn(t)), np.asarray(grid.points, dtype=float))
        return -v, a
    vals = [float(fn(xi)) for xi in grid.points]
    i = int(np.argmin(vals))
    return vals[i], grid.points[i]


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def radon_norm(v, p):
    """Planar Radon norm: ``l_p`` on the quadrants where ``x*y >= 0``, ``l_q`` elsewhere."""
    q = p / (p - 1.0)
    x, y = v[..., 0], v[..., 1]
    a = np.where(x * y >= 0, p, q)
    return (np.abs(x) ** a + np.abs(y) ** a) ** (1.0 / a)


@dataclass
class MoebiusMetric:
    """Element of the Moebius class of the visual metric at ``base``.

    ``log_density`` is ``log(d rho / d rho_base)``.  ``provenance`` records how
    the metric was built; ``center`` is set for visual metrics.
    """

    space: object
    base: object
    log_density: Callable
    provenance: dict = field(default_factory=dict)
    validated: bool = False
    center: object = None

    # -- constructors ---------------------------------------------------------

    @classmethod
    def visual(cls, space, x, base=None):
        base = space.origin if base is None else base
        lam = lambda xi: space.busemann(base, x, xi)
        return cls(space, base, lam, {"kind": "visual", "point": space.point_to_json(x)}, True, x)

    @classmethod
    def synthetic(cls, space, lam, base=None, label="synthetic"):
        base = space.origin if base is None else base
        return cls(space, base, lam, {"kind": label}, False)

    @classmethod
    def radon(cls, space, matrix, p, base=None):
        """Disk metric ``|det(Mv, Mw)| / (|Mv| |Mw|)`` for a planar Radon norm.

        Boundary angle ``phi`` corresponds to ``v = (cos(phi/2), sin(phi/2))``,
        and ``M`` lies in SL(2).  With the Euclidean norm this is the visual
        metric at the origin.
        """
        if not isinstance(space, DiskModel) or space.k != 1.0:
            raise ValueError("Radon-norm metrics are defined on the unit-curvature disk")
        M = np.asarray(matrix, dtype=float)
        if abs(np.linalg.det(M) - 1.0) > 1e-9:
            raise ValueError("Radon-norm metrics need a matrix of determinant one")
        base = space.origin if base is None else base
        if base != space.origin:
            raise ValueError("Radon-norm metrics are built against the origin")

        def lam(phi):
            phi = np.asarray(phi, dtype=float)
            v = np.stack([np.cos(phi / 2.0), np.sin(phi / 2.0)], axis=-1) @ M.T
            return -2.0 * np.log(radon_norm(v, p))

        prov = {"kind": "radon", "p": float(p), "matrix": M.tolist()}
        return cls(space, base, lam, prov, False)

    def renormalized(self, shift: float) -> "MoebiusMetric":
        """Same metric scaled by ``exp(shift)`` (a log-density shift)."""
        lam = self.log_density
        prov = dict(self.provenance, shift=self.provenance.get("shift", 0.0) + shift)
        return MoebiusMetric(self.space, self.base, lambda xi: lam(xi) + shift, prov, False, None)

    # -- evaluation -------------------------------------------------------------

    def lam(self, xi):
        return self.log_density(xi)

    def lam_many(self, points):
        if isinstance(self.space, DiskModel):
            return np.asarray(self.log_density(np.asarray(points, dtype=float)), dtype=float)
        return np.array([float(self.log_density(p)) for p in points])

    def __call__(self, xi, eta):
        return metric_eval(self, xi, eta)

    def require_validated(self):
        if not self.validated:
            raise ValidationError(f"metric {self.provenance.get('kind')} has not passed validation")
        return self

    # -- serialization ----------------------------------------------------------

    def to_json(self, grid: SampleGrid) -> str:
        space = self.space
        samples = self.lam_many(grid.points).tolist()
        doc = {
            "space": space.describe(),
            "base": space.point_to_json(self.base),
            "provenance": self.provenance,
            "validated": self.validated,
            "grid": [space.end_to_json(p) for p in grid.points],
            "log_density": samples,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MoebiusMetric":
        """Rebuild a disk metric from its grid samples (periodic linear interpolation).

        The result is provisional: it must be validated again before use.
        """
        doc = json.loads(text)
        if doc["space"]["kind"] != "disk":
            raise ValueError("only disk metrics can be rebuilt from samples")
        space = DiskModel(doc["space"]["k"])
        xs = np.asarray(doc["grid"], dtype=float)
        ys = np.asarray(doc["log_density"], dtype=float)
        lam = lambda phi: np.interp(np.mod(phi, TWO_PI), xs, ys, period=TWO_PI)
        prov = dict(doc["provenance"], restored=True)
        return cls(space, space.origin, lam, prov, False)


def metric_eval(rho: MoebiusMetric, xi, eta):
    """``rho(xi, eta) = rho_o(xi, eta) exp((lam(xi) + lam(eta)) / 2)``."""
    s = rho.space
    if isinstance(s, DiskModel):
        xi = np.asarray(getattr(xi, "angle", xi), dtype=float)
        eta = np.asarray(getattr(eta, "angle", eta), dtype=float)
        base = s.visual(rho.base, xi, eta)
        out = base * np.exp((rho.log_density(xi) + rho.log_density(eta)) / 2.0)
        return float(out) if np.ndim(out) == 0 else out
    if s.same_end(xi, eta):
        return 0.0
    return s.visual(rho.base, xi, eta) * math.exp((float(rho.log_density(xi)) + float(rho.log_density(eta))) / 2.0)


def _check_pair(rho2, rho1):
    if rho1.space != rho2.space or rho1.base != rho2.base:
        raise ValueError("metrics live over different base spaces")


def log_derivative(rho2: MoebiusMetric, rho1: MoebiusMetric):
    """``xi -> log(d rho2 / d rho1)(xi)``."""
    _check_pair(rho2, rho1)
    if rho1.center is not None and rho2.center is not None:
        s, a, b = rho1.space, rho1.center, rho2.center
        return lambda xi: s.busemann(a, b, xi)
    return lambda xi: rho2.log_density(xi) - rho1.log_density(xi)


def derivative(rho2: MoebiusMetric, rho1: MoebiusMetric):
    """``xi -> (d rho2 / d rho1)(xi)``."""
    f = log_derivative(rho2, rho1)
    return lambda xi: np.exp(f(xi))


def dM_distance(rho1: MoebiusMetric, rho2: MoebiusMetric, grid: SampleGrid) -> float:
    """``max_xi log(d rho2 / d rho1)(xi)`` with local refinement of the grid maximum."""
    rho1.require_validated()
    rho2.require_validated()
    val, _ = sup_over_boundary(rho1.space, log_derivative(rho2, rho1), grid)
    return max(0.0, val)


@dataclass
class MaxMinReport:
    """Extremes of ``log(d rho2 / d rho1)`` and the product check ``lambda * mu = 1``."""

    log_max: float
    argmax: object
    log_min: float
    argmin: object
    product_residual: float
    partner: object = None
    partner_distance: float = float("nan")
    partner_min_gap: float = float("nan")
    partner_rho2: float = float("nan")

    @property
    def partner_residual(self) -> float:
        return max(abs(self.partner_min_gap), abs(self.partner_rho2 - 1.0), abs(self.partner_distance - 1.0))


def antipode(rho: MoebiusMetric, xi, grid: SampleGrid):
    """A point at ``rho``-distance (close to) one from ``xi``."""
    s = rho.space
    if isinstance(s, DiskModel):
        a = float(getattr(xi, "angle", xi))
        pts = np.asarray(grid.points, dtype=float)
        fn = lambda t: np.log(np.maximum(metric_eval(rho, a, t), 1e-300))
        return _circle_sup(fn, pts)[1]
    best = max((p for p in grid.points if not s.same_end(p, xi)), key=lambda p: metric_eval(rho, xi, p))
    return best


def maxmin_report(rho2: MoebiusMetric, rho1: MoebiusMetric, grid: SampleGrid) -> MaxMinReport:
    rho1.require_validated()
    rho2.require_validated()
    s = rho1.space
    f = log_derivative(rho2, rho1)
    vmax, amax = sup_over_boundary(s, f, grid)
    vmin, amin = inf_over_boundary(s, f, grid)
    rep = MaxMinReport(vmax, amax, vmin, amin, abs(math.expm1(vmax + vmin)))
    partner = antipode(rho1, amax, grid)
    rep.partner = partner
    rep.partner_distance = float(metric_eval(rho1, amax, partner))
    rep.partner_min_gap = float(f(partner)) - vmin
    rep.partner_rho2 = float(metric_eval(rho2, amax, partner))
    return rep


@dataclass
class ValidationReport:
    passed: bool
    diameter: float
    worst_partner: float
    worst_triangle: float
    witness: tuple | None
    eps_grid: float
    shift: float
    checks: dict = field(default_factory=dict)


def _distance_matrix(rho: MoebiusMetric, grid: SampleGrid) -> np.ndarray:
    s = rho.space
    if isinstance(s, DiskModel):
        a = np.asarray(grid.points, dtype=float)
        return metric_eval(rho, a[:, None], a[None, :])
    pts = list(grid.points)
    n = len(pts)
    lam = rho.lam_many(pts)
    R = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            R[i, j] = R[j, i] = float(s.visual(rho.base, pts[i], pts[j])) * math.exp((lam[i] + lam[j]) / 2.0)
    return R


def validate_metric(rho: MoebiusMetric, grid: SampleGrid, tri_tol: float = 1e-9) -> ValidationReport:
    """Exhaustive grid check of the triangle inequality, diameter one and antipodality.

    The grid allowance for diameter and antipodality is ``2 h^2 C`` where ``h``
    is the grid spacing and ``C`` estimates the second derivative of each row of
    the distance matrix at its maximum.  The report suggests the log-density
    shift that brings the (refined) diameter to one.
    """
    R = _distance_matrix(rho, grid)
    n = len(R)
    worst = -np.inf
    witness = None
    for k in range(n):
        excess = R - (R[:, k][:, None] + R[k, :][None, :])
        idx = int(np.argmax(excess))
        if excess.flat[idx] > worst:
            worst = float(excess.flat[idx])
            witness = (idx // n, k, idx % n)
    rowmax = R.max(axis=1)
    jstar = R.argmax(axis=1)
    i = np.arange(n)
    second = np.abs(R[i, (jstar + 1) % n] - 2.0 * R[i, jstar] + R[i, (jstar - 1) % n])
    eps = 2.0 * float(second.max()) if isinstance(rho.space, DiskModel) else 0.0
    diameter = float(rowmax.max())
    if isinstance(rho.space, DiskModel):
        # refine the diameter around the best grid pair
        a = np.asarray(grid.points, dtype=float)
        r = int(np.argmax(rowmax))
        fn = lambda t: np.log(np.maximum(metric_eval(rho, a[r], t), 1e-300))
        refined = math.exp(_circle_sup(fn, a)[0])
        diameter = max(diameter, refined)
    shift = -math.log(diameter)
    checks = {
        "triangle": worst <= tri_tol,
        "diameter": 1.0 - eps - 1e-12 <= diameter <= 1.0 + 1e-9,
        "antipodal": float(rowmax.min()) >= 1.0 - eps - 1e-12,
    }
    return ValidationReport(
        all(checks.values()),
        diameter,
        float(rowmax.min()),
        worst,
        None if worst <= tri_tol else witness,
        eps,
        shift,
        checks,
    )


def validated(rho: MoebiusMetric, grid: SampleGrid, renormalize: bool = False) -> MoebiusMetric:
    """Return a validated copy of ``rho``; raises ``ValidationError`` on failure.

    With ``renormalize`` the suggested diameter shift is applied first.
    """
    if rho.validated:
        return rho
    if renormalize:
        rep = validate_metric(rho, grid)
        rho = rho.renormalized(rep.shift)
    rep = validate_metric(rho, grid)
    if not rep.passed:
        raise ValidationError(f"metric failed validation: {rep.checks}, witness {rep.witness}")
    return MoebiusMetric(rho.space, rho.base, rho.log_density, rho.provenance, True, rho.center)


def random_sl2(rng, max_stretch: float = 0.5) -> np.ndarray:
    a = rng.uniform(0.0, max_stretch)
    t1, t2 = rng.uniform(0.0, math.pi, size=2)
    rot = lambda t: np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    return rot(t1) @ np.diag([math.exp(a), math.exp(-a)]) @ rot(t2)


def random_radon_metric(space, rng, grid: SampleGrid, p_range=(1.2, 4.0)) -> MoebiusMetric:
    """Validated non-visual metric from a random Radon norm and SL(2) matrix."""
    while True:
        p = float(rng.uniform(*p_range))
        if abs(p - 2.0) < 0.1:
            continue
        rho = MoebiusMetric.radon(space, random_sl2(rng), p)
        if validate_metric(rho, grid).passed:
            return validated(rho, grid)


def pushforward(f, rho: MoebiusMetric) -> MoebiusMetric:
    """Push ``rho`` forward along the Moebius map ``f``: ``(f_* rho)(a, b) = rho(f^-1 a, f^-1 b)``.

    The log-density against the base is ``lam(f^-1 xi) - log Df(f^-1 xi)``,
    where ``Df`` is the derivative of ``f`` from the base visual metric to itself.
    """
    f.require_validated()
    s = rho.space
    o = rho.base
    lam = rho.log_density

    def pushed(xi):
        z = f.inverse(xi)
        return lam(z) - f.log_derivative(o, o, z)

    prov = {"kind": "pushforward", "map": f.description, "of": rho.provenance}
    return MoebiusMetric(s, o, pushed, prov, rho.validated)
