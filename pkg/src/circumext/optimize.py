"""Minimization on the hyperboloid model of the disk.

Two solvers are provided.

* :func:`minimize_max_linear` solves ``min_Z max_i -<Z, W_i>`` exactly, for
  future-pointing vectors ``W_i``.  In the chart ``Z = (sqrt(1+|w|^2), w)`` each
  term is convex in ``w``, so the epigraph problem is a smooth convex program
  that SLSQP solves to high accuracy.  ``cosh d(z, p)`` and ``exp B(z, p, xi)``
  are both of this form, which covers circumcenters and ``u_K``.
* :func:`geodesic_minimize` is a derivative-free minimizer for black-box
  geodesically convex objectives: alternating line searches along two
  orthogonal geodesics through the current point, with a simplex fallback.

Every result carries a probe certificate: the value at the argmin must not
exceed the values at eight points at distance ``tol`` around it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from circumext.spaces import TWO_PI, DiskPoint, lorentz_dot

POSITION_TOL = 1e-6
VALUE_TOL = 1e-10
MAX_SWEEPS = 200
CERT_SLACK = 1e-13


@dataclass
class MinimizerResult:
    argmin: object
    value: float
    tolerance: float
    iterations: int
    certified: bool = True
    method: str = ""


# ---------------------------------------------------------------------------
# Hyperboloid helpers
# ---------------------------------------------------------------------------


def lift(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return np.concatenate([[math.sqrt(1.0 + w @ w)], w])


def chart(x: DiskPoint) -> np.ndarray:
    return x.hyperboloid[1:].copy()


def lorentz_cross(a, b) -> np.ndarray:
    """Vector Lorentz-orthogonal to both ``a`` and ``b``."""
    c = np.cross(a, b)
    return np.array([-c[0], c[1], c[2]])


def tangent_frame(X) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of the tangent plane at hyperboloid point ``X``."""
    E = np.array([0.0, 1.0, 0.0]) if abs(X[2]) >= abs(X[1]) else np.array([0.0, 0.0, 1.0])
    U = E + lorentz_dot(E, X) * X
    U = U / math.sqrt(lorentz_dot(U, U))
    V = lorentz_cross(X, U)
    V = V / math.sqrt(lorentz_dot(V, V))
    return U, V


def exp_map(X, U, t):
    """Point at distance ``t`` from ``X`` along the unit tangent ``U``."""
    return math.cosh(t) * X + math.sinh(t) * U


def probe_points(x: DiskPoint, radius: float, count: int = 8) -> list[DiskPoint]:
    X = x.hyperboloid
    U, V = tangent_frame(X)
    out = []
    for j in range(count):
        a = TWO_PI * j / count
        out.append(DiskPoint.from_hyperboloid(exp_map(X, math.cos(a) * U + math.sin(a) * V, radius)))
    return out


def certify(fn, x: DiskPoint, tol: float) -> bool:
    """Value at ``x`` is no larger than at eight probes at distance ``tol``."""
    v = fn(x)
    return all(v <= fn(p) + CERT_SLACK * max(1.0, abs(v)) for p in probe_points(x, tol))


# ---------------------------------------------------------------------------
# Max of linear functionals
# ---------------------------------------------------------------------------


def max_linear(W: np.ndarray, Z: np.ndarray) -> float:
    return float(np.max(-lorentz_dot(Z[None, :], W)))


def _slsqp_max_linear(W: np.ndarray, w0: np.ndarray):
    scale = max_linear(W, lift(w0))
    Ws = W / scale
    W0 = Ws[:, 0]
    Wv = Ws[:, 1:]

    def terms(w):
        z0 = math.sqrt(1.0 + w @ w)
        return z0 * W0 - Wv @ w, z0

    def cons(v):
        t, _ = terms(v[:2])
        return v[2] - t

    def cons_jac(v):
        w = v[:2]
        _, z0 = terms(w)
        J = np.empty((len(W0), 3))
        J[:, :2] = -(W0[:, None] * (w / z0)[None, :] - Wv)
        J[:, 2] = 1.0
        return J

    t0, _ = terms(w0)
    x0 = np.concatenate([w0, [float(t0.max())]])
    res = minimize(
        lambda v: v[2],
        x0,
        jac=lambda v: np.array([0.0, 0.0, 1.0]),
        constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
        method="SLSQP",
        options={"ftol": 1e-16, "maxiter": 500},
    )
    w = res.x[:2]
    # Accept the SLSQP exit "positive directional derivative" when feasible.
    feasible = float(cons(res.x).min()) >= -1e-12
    return w, res.nit, bool(res.success or feasible)


def minimize_max_linear(W, start: DiskPoint | None = None, tol: float = POSITION_TOL) -> MinimizerResult:
    """Minimize ``z -> max_i -<Z, W_i>`` over the disk.

    ``W`` is an ``(m, 3)`` array of future-pointing vectors whose positive span
    is not a single ray (otherwise the objective is not proper).
    """
    W = np.asarray(W, dtype=float)
    w = chart(start) if start is not None else np.zeros(2)
    iters = 0
    ok = False
    for _ in range(4):
        w_new, nit, ok = _slsqp_max_linear(W, w)
        iters += nit
        moved = float(np.linalg.norm(w_new - w))
        w = w_new
        if ok and moved < 1e-9:
            break
    x = DiskPoint.from_hyperboloid(lift(w))
    fn = lambda p: max_linear(W, p.hyperboloid)
    cert = certify(fn, x, tol)
    if not cert:
        res = geodesic_minimize(fn, x, tol=tol)
        res.iterations += iters
        res.method = "slsqp+line-search"
        return res
    return MinimizerResult(x, fn(x), tol, iters, cert, "slsqp")


def minimize_max_family(family, grid_angles, start: DiskPoint | None = None, tol: float = POSITION_TOL,
                        rtol: float = 1e-13, max_rounds: int = 40):
    """Minimize ``z -> sup_theta -<Z, W(theta)>`` for a continuous family ``W``.

    Exchange method: solve the finite problem on the current angle set, locate
    the continuum maximizer at the solution, add it, and repeat until the
    discrete and continuum maxima agree to relative ``rtol``.
    """
    from circumext.metrics import _circle_sup

    angles = np.asarray(grid_angles, dtype=float)
    base = angles.copy()
    res = None
    for rounds in range(max_rounds):
        res = minimize_max_linear(family(angles), start, tol)
        Z = res.argmin.hyperboloid
        sup, arg = _circle_sup(lambda t: -lorentz_dot(Z[None, :], family(np.atleast_1d(t))), base)
        if sup <= res.value * (1.0 + rtol):
            break
        angles = np.append(angles, arg)
        start = res.argmin
    fn = lambda p: family_sup(family, base, p)
    res.value = fn(res.argmin)
    res.certified = certify(fn, res.argmin, tol)
    res.method += f"+exchange({rounds})"
    return res


def family_sup(family, grid_angles, x: DiskPoint) -> float:
    from circumext.metrics import _circle_sup

    Z = x.hyperboloid
    return _circle_sup(lambda t: -lorentz_dot(Z[None, :], family(np.atleast_1d(t))), np.asarray(grid_angles))[0]


# ---------------------------------------------------------------------------
# Black-box geodesic minimizer
# ---------------------------------------------------------------------------


def _line_search(fn, X, U, step):
    """Minimize ``t -> fn(exp(X, tU))`` by bounded scalar search, growing the bracket."""
    g = lambda t: fn(DiskPoint.from_hyperboloid(exp_map(X, U, t)))
    f0 = g(0.0)
    width = step
    while width < 50.0 and min(g(width), g(-width)) < f0:
        width *= 2.0
    res = minimize_scalar(g, bounds=(-width, width), method="bounded", options={"xatol": 1e-12})
    if res.fun < f0:
        return float(res.x), float(res.fun)
    return 0.0, f0


def geodesic_minimize(fn, start: DiskPoint, tol: float = POSITION_TOL, value_tol: float = VALUE_TOL,
                      max_sweeps: int = MAX_SWEEPS, step: float = 1.0) -> MinimizerResult:
    """Alternating geodesic line searches for a geodesically convex ``fn``.

    Each sweep searches along two orthogonal geodesics through the current
    point.  The direction just searched is carried along its own geodesic, the
    second is rebuilt by the Lorentz cross product.  If sweeps stall before the
    certificate passes, Nelder-Mead on the chart finishes the job.
    """
    X = start.hyperboloid
    U, _ = tangent_frame(X)
    value = fn(start)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        moved = 0.0
        prev = value
        for _ in range(2):
            t, value = _line_search(fn, X, U, step)
            if t != 0.0:
                ch, sh = math.cosh(t), math.sinh(t)
                X, U = lift((ch * X + sh * U)[1:]), sh * X + ch * U
                U = U + lorentz_dot(U, X) * X
                U = U / math.sqrt(lorentz_dot(U, U))
            moved = max(moved, abs(t))
            W = lorentz_cross(X, U)
            U = W / math.sqrt(lorentz_dot(W, W))
        step = max(4.0 * moved, 10.0 * tol)
        if moved < tol and prev - value < value_tol:
            break
    x = DiskPoint.from_hyperboloid(X)
    method = "line-search"
    # Line searches can stall on ridges of a nonsmooth max; polish with
    # restarted Nelder-Mead until the value stops improving.
    best = fn(x)
    for _ in range(10):
        res = minimize(
            lambda w: fn(DiskPoint.from_hyperboloid(lift(w))),
            chart(x),
            method="Nelder-Mead",
            options={"xatol": tol * 1e-2, "fatol": value_tol * 1e-2, "maxiter": 4000, "adaptive": True,
                     "initial_simplex": chart(x) + np.array([[0.0, 0.0], [step, 0.0], [0.0, step]])},
        )
        sweeps += int(res.nit)
        step = max(10.0 * tol, min(step, 0.1))
        if res.fun < best - value_tol * 1e-2:
            x = DiskPoint.from_hyperboloid(lift(res.x))
            improved = best - res.fun
            best = float(res.fun)
            method = "line-search+nelder-mead"
            if improved < value_tol and certify(fn, x, tol):
                break
        elif certify(fn, x, tol):
            break
    return MinimizerResult(x, fn(x), tol, sweeps, certify(fn, x, tol), method)
