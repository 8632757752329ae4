"""Geodesics, projective charts, the conformal cylinder model, and causal
predicates.

The affine domain of a quadric point p is A_p = {q : B_Q(p, q) < 0}; the
chart of the base point p0 = [1:0:0:0],

    (x, y, z) = (x3/x1, x4/x1, x2/x1),

maps A_p0 onto the solid region x^2 + y^2 - z^2 < 1 and sends geodesics to
straight lines.  The cylinder model S^1 x D^2 (hemisphere D^2 with the
round metric, product metric -dt^2 + ds^2) carries the same causal
structure and is used for all interior-interior causality queries.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import config
from .core import (
    LinearPoint,
    ProjPoint,
    Isometry,
    b_eval,
    q_eval,
    as_vec4,
    isometry_fixing_frame,
)
from .errors import BadTangent, DegeneratePlane, OutsideAffineDomain, OutsideDomain

P0 = ProjPoint(np.array([1.0, 0.0, 0.0, 0.0]))


class GeodesicClass(Enum):
    TIMELIKE_CLOSED = "TimelikeClosed"
    SPACELIKE = "Spacelike"
    LIGHTLIKE = "Lightlike"
    EMPTY = "Empty"


class CausalClass(Enum):
    TIMELIKE = "Timelike"
    CAUSAL_NULL = "CausalNull"
    NONE = "None"


@dataclass(frozen=True)
class Plane2:
    """A 2-dimensional linear subspace of R^4, spanned by u and v."""

    u: np.ndarray
    v: np.ndarray

    def __init__(self, u, v):
        u = np.array(as_vec4(u), dtype=float)
        v = np.array(as_vec4(v), dtype=float)
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu == 0.0 or nv == 0.0:
            raise DegeneratePlane("zero spanning vector")
        u, v = u / nu, v / nv
        gram = np.array([[u @ u, u @ v], [u @ v, v @ v]])
        if np.linalg.det(gram) < 1e-12:
            raise DegeneratePlane("spanning vectors are linearly dependent")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    def orthonormal_basis(self) -> tuple[np.ndarray, np.ndarray]:
        e1 = self.u
        w = self.v - (self.v @ e1) * e1
        return e1, w / np.linalg.norm(w)


def classify_plane(plane: Plane2, tol: float = config.TOL_SIGNATURE) -> GeodesicClass:
    """Classify the intersection of a 2-plane with the quadric by the
    signature of Q restricted to the plane:

        (-, -) closed timelike geodesic., (-, +) spacelike pair,
        (0, -) lightlike, and (+, +), (0, +), (0, 0) empty.
    """
    e1, e2 = plane.orthonormal_basis()
    m = np.array(
        [
            [q_eval(e1), b_eval(e1, e2)],
            [b_eval(e1, e2), q_eval(e2)],
        ]
    )
    ev = np.linalg.eigvalsh(m)
    neg = int(np.sum(ev < -tol))
    pos = int(np.sum(ev > tol))
    if neg == 2:
        return GeodesicClass.TIMELIKE_CLOSED
    if neg == 1 and pos == 1:
        return GeodesicClass.SPACELIKE
    if neg == 1 and pos == 0:
        return GeodesicClass.LIGHTLIKE
    return GeodesicClass.EMPTY


def _check_tangent(p: LinearPoint, w, expect_q=None):
    w = as_vec4(w)
    if abs(b_eval(p.v, w)) > 1e-9:
        raise BadTangent(f"B_Q(p, w) = {b_eval(p.v, w):.3g}, not a tangent vector")
    qw = float(q_eval(w))
    if expect_q is not None and abs(qw - expect_q) > 1e-9:
        raise BadTangent(f"Q(w) = {qw:.6g}, expected {expect_q}")
    return w, qw


def geodesic_point(p: LinearPoint, w, s: float) -> LinearPoint:
    """Point at parameter s on the geodesic through p with tangent w.

    w must be B_Q-orthogonal to p with Q(w) in {-1, 0, +1}; the closed
    forms are cos/sin (timelike), cosh/sinh (spacelike) and affine
    (lightlike) combinations inside span{p, w}.
    """
    w = as_vec4(w)
    if abs(b_eval(p.v, w)) > 1e-9:
        raise BadTangent("tangent not B_Q-orthogonal to the base point")
    qw = float(q_eval(w))
    if abs(qw + 1.0) <= 1e-9:
        v = np.cos(s) * p.v + np.sin(s) * w
    elif abs(qw - 1.0) <= 1e-9:
        v = np.cosh(s) * p.v + np.sinh(s) * w
    elif abs(qw) <= 1e-9:
        v = p.v + s * w
    else:
        raise BadTangent(f"Q(w) = {qw:.6g} not normalized to -1, 0 or +1")
    return LinearPoint(v)


def geodesic_flow(p: LinearPoint, w, s: float) -> tuple[LinearPoint, np.ndarray]:
    """Geodesic point together with the transported tangent at parameter s."""
    w, qw = _check_tangent(p, w)
    if abs(qw + 1.0) <= 1e-9:
        return geodesic_point(p, w, s), -np.sin(s) * p.v + np.cos(s) * w
    if abs(qw - 1.0) <= 1e-9:
        return geodesic_point(p, w, s), np.sinh(s) * p.v + np.cosh(s) * w
    return geodesic_point(p, w, s), w.copy()


@dataclass(frozen=True)
class ChartPoint:
    x: float
    y: float
    z: float

    @property
    def xyz(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def interior_margin(self) -> float:
        """1 - (x^2 + y^2 - z^2); positive inside, zero on the boundary."""
        return 1.0 - (self.x**2 + self.y**2 - self.z**2)


def chart_phi_p0(q: ProjPoint) -> ChartPoint:
    """Chart of the base point [1:0:0:0]: (x, y, z) = (x3/x1, x4/x1, x2/x1).

    Defined on the half-space x1 > 0 of S^3, i.e. on B_Q(p0, q) < 0; maps
    great circles to straight lines, the interior to x^2+y^2-z^2 < 1 and
    the boundary quadric to the one-sheeted hyperboloid x^2+y^2-z^2 = 1.
    """
    v = q.v
    if v[0] <= config.TOL_CAUSAL:
        raise OutsideDomain(f"x1 = {v[0]:.3g} <= 0: outside the chart domain")
    return ChartPoint(v[2] / v[0], v[3] / v[0], v[1] / v[0])


def chart_phi_p0_inverse(c: ChartPoint) -> ProjPoint:
    return ProjPoint(np.array([1.0, c.z, c.x, c.y]))


def chart_lift_interior(x, y, z) -> np.ndarray:
    """Lift chart coordinates of interior points to the quadric Q = -1.

    Batched: x, y, z arrays of equal shape; returns (..., 4).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    s2 = 1.0 + z**2 - x**2 - y**2
    if np.any(s2 <= 0.0):
        raise OutsideDomain("chart point not interior")
    s = np.sqrt(s2)
    return np.stack([1.0 / s, z / s, x / s, y / s], axis=-1)


def chart_phi_p(p: LinearPoint, q: ProjPoint) -> ChartPoint:
    """Chart adapted to an arbitrary base point p.

    Composes the base chart with an isometry sending p to p0, built by
    B_Q Gram-Schmidt from the standard basis; for p = p0 the isometry is
    the identity and the base chart is recovered exactly.
    """
    if b_eval(p.v, q.v) >= -config.TOL_CAUSAL * np.linalg.norm(q.v):
        raise OutsideDomain("q is outside the affine domain of p")
    sigma = isometry_fixing_frame(p)
    return chart_phi_p0(sigma(q))


@dataclass(frozen=True)
class CylinderPoint:
    """Point of the conformal model S^1 x closed hemisphere."""

    t: float
    u: np.ndarray  # unit vector (u3, u4, u5), u5 >= 0

    def __init__(self, t, u):
        u = np.array(u, dtype=float)
        n = np.linalg.norm(u)
        if abs(n - 1.0) > 1e-9:
            u = u / n
        if u[2] < -1e-12:
            raise OutsideDomain("hemisphere coordinate u5 < 0")
        u[2] = max(u[2], 0.0)
        u.flags.writeable = False
        object.__setattr__(self, "t", float(t))
        object.__setattr__(self, "u", u)

    @property
    def on_boundary(self) -> bool:
        return self.u[2] <= 1e-9


def conformal_embed(q: ProjPoint) -> CylinderPoint:
    """Embed a point of the space or its boundary into S^1 x D^2-bar.

    Interior points lift to the null quadric of R^{2,3} with x5 = 1,
    boundary points with x5 = 0; rescaling by r = sqrt(x1^2 + x2^2) puts
    the lift on the product of unit circles/spheres, which is well defined
    because x3^2 + x4^2 + x5^2 = x1^2 + x2^2 on that quadric.
    """
    sign = q.q_sign
    if sign > 0:
        raise OutsideDomain("point is outside the closure of the space")
    if sign < 0:
        v = LinearPoint(q.v).v
        lift = np.array([v[0], v[1], v[2], v[3], 1.0])
    else:
        lift = np.array([q.v[0], q.v[1], q.v[2], q.v[3], 0.0])
    r = np.hypot(lift[0], lift[1])
    t = float(np.arctan2(lift[1], lift[0]))
    u = lift[2:5] / r
    return CylinderPoint(t, u)


def conformal_unembed(c: CylinderPoint) -> ProjPoint:
    """Inverse of conformal_embed (t is taken mod 2 pi)."""
    x1, x2 = np.cos(c.t), np.sin(c.t)
    u3, u4 = c.u[0], c.u[1]
    return ProjPoint(np.array([x1, x2, u3, u4]))


def cylinder_distance(u, v) -> float:
    """Great-circle distance on the hemisphere."""
    return float(np.arccos(np.clip(np.dot(u, v), -1.0, 1.0)))


def causal_relation(q: ProjPoint, r: ProjPoint, p: LinearPoint, tol: float = config.TOL_CAUSAL) -> CausalClass:
    """Causal relation between a boundary point q of the affine domain of p
    and a point r of the closed domain: Timelike / CausalNull / None by the
    sign of B_Q(q, r) on Euclid-normalized representatives.
    """
    if b_eval(p.v, q.v) >= -tol:
        raise OutsideAffineDomain("q is not in the affine domain of p")
    if b_eval(p.v, r.v) >= -tol:
        raise OutsideAffineDomain("r is not in the affine domain of p")
    b = float(b_eval(q.v, r.v))
    if b > tol:
        return CausalClass.TIMELIKE
    if b < -tol:
        return CausalClass.NONE
    return CausalClass.CAUSAL_NULL


def cylinder_causal_relation(a: CylinderPoint, b: CylinderPoint, tol: float = config.TOL_CAUSAL) -> CausalClass:
    """Interior-interior causal relation in the product model: points are
    timelike related iff |dt| > ds, null iff equal (t differences shorter
    than a half turn)."""
    dt = abs((a.t - b.t + np.pi) % (2.0 * np.pi) - np.pi)
    ds = cylinder_distance(a.u, b.u)
    if dt > ds + tol:
        return CausalClass.TIMELIKE
    if dt < ds - tol:
        return CausalClass.NONE
    return CausalClass.CAUSAL_NULL


def eps_normal_flow(p: LinearPoint, n, eps: float) -> LinearPoint:
    """Flow p for time eps along the timelike geodesic with unit normal n.

    n must be a unit timelike tangent at p; the flowed point is
    cos(eps) p + sin(eps) n.
    """
    n, _ = _check_tangent(p, n, expect_q=-1.0)
    return LinearPoint(np.cos(eps) * p.v + np.sin(eps) * n)


def lorentzian_curve_length(points: np.ndarray) -> float:
    """Length of a timelike polyline on the quadric: sum over segments of
    sqrt(-Q(dp)) with the chord corrected to second order by the midpoint
    normalization.  Used as an independent quadrature check.
    """
    pts = np.asarray(points, dtype=float)
    total = 0.0
    for i in range(len(pts) - 1):
        d = pts[i + 1] - pts[i]
        qd = float(q_eval(d))
        if qd > 0:
            raise BadTangent("segment is not causal")
        total += np.sqrt(-qd)
    return total
