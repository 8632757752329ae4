"""The exact genus-1 model: diagonal abelian isometries, orbit
classification, the angle time function and the closed-form CMC foliation.

A is the group of pairs (g^t, g^s) of diagonal exponentials
g^t = diag(e^t, e^-t) acting on SL(2, R) by g -> g^t g g^{-s}.  The union
of spacelike A-orbits has four components; the one modeled here is

    U = {[[a, b], [c, d]] in SL(2, R) : a > 0, b > 0, c < 0, d > 0},

on which each orbit contains a unique rotation R_theta with
cos^2(theta) = a d and -sin^2(theta) = b c, theta in (0, pi/2).  The orbit
through R_theta carries first and second fundamental forms

    I(p, q)  = (p - q)^2 cos^2 theta + (p + q)^2 sin^2 theta,
    II(p, q) = ((p - q)^2 - (p + q)^2) sin(2 theta),

in orbit coordinates (p, q) = (dt, ds), hence principal curvatures
-2 cot(theta), 2 tan(theta) and constant mean curvature

    kappa(theta) = -4 cot(2 theta),

strictly increasing in theta; theta (equivalently kappa) is the CMC time.
All curvature values in this package carry the same convention (the
second fundamental form is the unpolarized symmetrization
-g(grad_X n, Y) - g(grad_Y n, X) with n the future unit normal), so the
finite-difference evaluator in `meancurv` reproduces kappa exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import SL2Matrix, LinearPoint
from .errors import NotInU

H_DIAG = np.array([[1.0, 0.0], [0.0, -1.0]])
H_PARA = np.array([[0.0, 1.0], [0.0, 0.0]])


class OrbitType(Enum):
    EUCLIDEAN_LINE = "EuclideanLine"
    ISOTROPIC_LINE = "IsotropicLine"
    EUCLIDEAN_PLANE = "EuclideanPlane"
    MINKOWSKI_PLANE = "MinkowskiPlane"
    DEGENERATE_PLANE = "DegeneratePlane"


@dataclass(frozen=True)
class OrbitClass:
    dim: int
    type: OrbitType


@dataclass(frozen=True)
class TorusPoint:
    """A matrix in the component U (all of a, b, d positive, c negative)."""

    g: SL2Matrix

    def __post_init__(self):
        g = self.g
        if not (g.a > 0 and g.b > 0 and g.c < 0 and g.d > 0):
            raise NotInU(f"entries ({g.a:.3g}, {g.b:.3g}, {g.c:.3g}, {g.d:.3g}) not in U")


@dataclass(frozen=True)
class LatticePair:
    """Two independent translation vectors (t, s) generating a lattice in A."""

    g1: tuple[float, float]
    g2: tuple[float, float]

    def __post_init__(self):
        if abs(self.covolume) < 1e-12:
            raise ValueError("lattice generators are linearly dependent")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([self.g1, self.g2]).T

    @property
    def covolume(self) -> float:
        return float(abs(np.linalg.det(np.array([self.g1, self.g2]))))

    def reduce(self, t: float, s: float) -> tuple[float, float]:
        """Representative of (t, s) in the fundamental parallelogram."""
        coeff = np.linalg.solve(self.matrix, np.array([t, s]))
        coeff -= np.floor(coeff)
        out = self.matrix @ coeff
        return float(out[0]), float(out[1])


def theta(p: TorusPoint) -> float:
    """Angle of the unique rotation in the A-orbit: arccos(sqrt(ad)).

    Consistency of the two defining equalities (cos^2 = ad, -sin^2 = bc)
    is guaranteed by det = 1.
    """
    g = p.g
    ad = g.a * g.d
    if not (0.0 < ad < 1.0):
        raise NotInU(f"ad = {ad:.6g} outside (0, 1)")
    return float(np.arccos(np.sqrt(ad)))


def normalize_to_rotation(p: TorusPoint) -> tuple[float, float, float]:
    """(t, s, theta) with g^t g g^{-s} = R_theta.

    The translation amounts are t = (log(d/a) + log(-c/b)) / 4 and
    s = (log(-c/b) - log(d/a)) / 4; acting by (g^alpha, g^beta) beforehand
    shifts (t, s) by (-alpha, -beta) and leaves theta unchanged.
    """
    g = p.g
    th = theta(p)
    half_log_da = 0.5 * np.log(g.d / g.a)
    half_log_cb = 0.5 * np.log(-g.c / g.b)
    t = 0.5 * (half_log_da + half_log_cb)
    s = 0.5 * (half_log_cb - half_log_da)
    return float(t), float(s), th


def orbit_classify(g: SL2Matrix, mode: str = "hyp-hyp", tol: float = 1e-10) -> OrbitClass:
    """Classify the A-orbit of g for the three one-parameter-pair types.

    The induced metric on a 2-dimensional orbit is the constant quadratic
    form -det(hL g ds - g hR dt) in the coordinates (ds, dt); 1-dimensional
    orbits are detected by g hR g^{-1} = hL.
    """
    if mode == "hyp-hyp":
        hl = hr = H_DIAG
    elif mode == "par-par":
        hl = hr = H_PARA
    elif mode == "hyp-par":
        hl, hr = H_DIAG, H_PARA
    else:
        raise ValueError(f"unknown mode {mode!r}")
    gm = g.matrix
    g_inv = g.inv().matrix

    if np.max(np.abs(gm @ hr @ g_inv - hl)) <= 1e-9:
        # 1-dimensional orbit; metric is -det(hl) (ds - dt)^2.
        if abs(np.linalg.det(hl)) <= tol:
            return OrbitClass(1, OrbitType.ISOTROPIC_LINE)
        return OrbitClass(1, OrbitType.EUCLIDEAN_LINE)

    u_mat = hl @ gm  # coefficient of ds
    v_mat = -gm @ hr  # coefficient of dt
    # -det(U ds + V dt) = A ds^2 + 2 B ds dt + C dt^2.
    a_coef = -np.linalg.det(u_mat)
    c_coef = -np.linalg.det(v_mat)
    b_coef = 0.5 * (-np.linalg.det(u_mat + v_mat) + np.linalg.det(u_mat) + np.linalg.det(v_mat))
    m = np.array([[a_coef, b_coef], [b_coef, c_coef]])
    ev = np.linalg.eigvalsh(m)
    neg = int(np.sum(ev < -tol))
    pos = int(np.sum(ev > tol))
    if pos == 2:
        return OrbitClass(2, OrbitType.EUCLIDEAN_PLANE)
    if pos == 1 and neg == 1:
        return OrbitClass(2, OrbitType.MINKOWSKI_PLANE)
    return OrbitClass(2, OrbitType.DEGENERATE_PLANE)


def orbit_first_form(th: float, p: float, q: float) -> float:
    """Induced metric of the orbit at angle th on the velocity (p, q)."""
    return (p - q) ** 2 * np.cos(th) ** 2 + (p + q) ** 2 * np.sin(th) ** 2


def orbit_second_form(th: float, p: float, q: float) -> float:
    """Second fundamental form of the orbit on the velocity (p, q)."""
    return ((p - q) ** 2 - (p + q) ** 2) * np.sin(2.0 * th)


def kappa(th) -> float | np.ndarray:
    """Mean curvature of the orbit at angle th: -4 cot(2 th)."""
    th = np.asarray(th, dtype=float)
    out = -4.0 / np.tan(2.0 * th)
    return float(out) if out.ndim == 0 else out


def kappa_derivative(th) -> float | np.ndarray:
    th = np.asarray(th, dtype=float)
    out = 8.0 / np.sin(2.0 * th) ** 2
    return float(out) if out.ndim == 0 else out


def principal_curvatures(th: float) -> tuple[float, float]:
    """(-2 cot th, 2 tan th); their sum is kappa(th)."""
    return -2.0 / np.tan(th), 2.0 * np.tan(th)


def cmc_time(point: TorusPoint) -> float:
    """kappa(theta(point)); constant on A-orbits and increasing toward
    the future."""
    return kappa(theta(point))


def embed_orbit_vec(th, t, s) -> np.ndarray:
    """Quadric coordinates of g^t R_th g^{-s} (batched over leading axes)."""
    th = np.asarray(th, dtype=float)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    a = np.cos(th) * np.exp(t - s)
    b = np.sin(th) * np.exp(t + s)
    c = -np.sin(th) * np.exp(-(t + s))
    d = np.cos(th) * np.exp(s - t)
    x1 = 0.5 * (a + d)
    x2 = 0.5 * (c - b)
    x3 = 0.5 * (d - a)
    x4 = 0.5 * (b + c)
    return np.stack([x1, x2, x3, x4], axis=-1)


def embed_orbit(th: float, t: float, s: float) -> LinearPoint:
    """The orbit parametrization as a quadric point."""
    return LinearPoint(embed_orbit_vec(th, t, s))


def slice_volume_density(th) -> float | np.ndarray:
    """Area density of the orbit metric in (t, s) coordinates: sin(2 th).

    With a lattice, the leaf area is density times the lattice covolume.
    """
    th = np.asarray(th, dtype=float)
    out = np.sin(2.0 * th)
    return float(out) if out.ndim == 0 else out


def leaf_area(th: float, lattice: LatticePair) -> float:
    return float(slice_volume_density(th)) * lattice.covolume


def transported_normal(th, t, s) -> np.ndarray:
    """Future unit normal of the orbit at g^t R_th g^{-s}, as a quadric
    tangent vector (batched)."""
    th = np.asarray(th, dtype=float)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    a = -np.sin(th) * np.exp(t - s)
    b = np.cos(th) * np.exp(t + s)
    c = -np.cos(th) * np.exp(-(t + s))
    d = -np.sin(th) * np.exp(s - t)
    x1 = 0.5 * (a + d)
    x2 = 0.5 * (c - b)
    x3 = 0.5 * (d - a)
    x4 = 0.5 * (b + c)
    return np.stack([x1, x2, x3, x4], axis=-1)


def foliation_table(thetas, lattice: LatticePair | None = None) -> np.ndarray:
    """Rows (theta, kappa, k1, k2, area_density) over a theta grid."""
    thetas = np.asarray(thetas, dtype=float)
    k1 = -2.0 / np.tan(thetas)
    k2 = 2.0 * np.tan(thetas)
    dens = np.sin(2.0 * thetas)
    if lattice is not None:
        dens = dens * lattice.covolume
    return np.stack([thetas, kappa(thetas), k1, k2, dens], axis=-1)
