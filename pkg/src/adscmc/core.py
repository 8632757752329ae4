"""Linear model of the 3D anti-de Sitter space and its isometries.

The ambient space is R^4 with coordinates (x1, x2, x3, x4) and the
quadratic form

    Q(v) = -x1^2 - x2^2 + x3^2 + x4^2,

of signature (-, -, +, +).  The space itself is the quadric (Q = -1) with
the induced Lorentzian metric.  The alternative coordinates

    (a, b, c, d) = (x1 - x3, -x2 + x4, x2 + x4, x1 + x3)

identify the quadric with SL(2, R) via -ad + bc = Q, and the identity
component of the isometry group with pairs (gL, gR) in SL(2, R) x SL(2, R)
acting by g -> gL g gR^{-1}.

Time orientation: the vector field K(p) = (x2, -x1, 0, 0) is everywhere
timelike on the quadric and is declared future-directed.  Equivalently the
circle s -> (cos s, -sin s, 0, 0) is future-directed with increasing s;
this is the orientation along which the closed-form CMC time of the
torus-universe module increases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import BadTangent, InvalidIsometry, InvalidPoint

# Matrix of the bilinear form B_Q in (x1, x2, x3, x4) coordinates.
G_METRIC = np.diag([-1.0, -1.0, 1.0, 1.0])

# Rows send x-coordinates to (a, b, c, d).
_T_ABCD = np.array(
    [
        [1.0, 0.0, -1.0, 0.0],
        [0.0, -1.0, 0.0, 1.0],
        [0.0, 1.0, 0.0, 1.0],
        [1.0, 0.0, 1.0, 0.0],
    ]
)
_T_ABCD_INV = np.linalg.inv(_T_ABCD)


def as_vec4(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 4:
        raise ValueError(f"expected 4 coordinates, got shape {v.shape}")
    return v


def q_eval(v) -> float | np.ndarray:
    """Quadratic form -x1^2 - x2^2 + x3^2 + x4^2 (batched over leading axes)."""
    v = as_vec4(v)
    return -v[..., 0] ** 2 - v[..., 1] ** 2 + v[..., 2] ** 2 + v[..., 3] ** 2


def b_eval(u, v) -> float | np.ndarray:
    """Polarization of q_eval: b_eval(v, v) == q_eval(v)."""
    u = as_vec4(u)
    v = as_vec4(v)
    return -u[..., 0] * v[..., 0] - u[..., 1] * v[..., 1] + u[..., 2] * v[..., 2] + u[..., 3] * v[..., 3]


def to_abcd(v) -> np.ndarray:
    """(a, b, c, d) = (x1 - x3, -x2 + x4, x2 + x4, x1 + x3); -ad + bc = Q."""
    v = as_vec4(v)
    return v @ _T_ABCD.T


def from_abcd(w) -> np.ndarray:
    w = as_vec4(w)
    return w @ _T_ABCD_INV.T


def abcd_matrix(v) -> np.ndarray:
    """The 2x2 matrix [[a, b], [c, d]] of a vector; det = -q_eval(v)."""
    a, b, c, d = to_abcd(v)
    return np.array([[a, b], [c, d]])


def from_abcd_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return from_abcd(np.array([m[0, 0], m[0, 1], m[1, 0], m[1, 1]]))


def future_reference(v) -> np.ndarray:
    """Future-directed timelike reference field K(p) = (x2, -x1, 0, 0)."""
    v = as_vec4(v)
    out = np.zeros_like(v)
    out[..., 0] = v[..., 1]
    out[..., 1] = -v[..., 0]
    return out


def is_future_directed(w, p) -> bool:
    """True when the timelike tangent w at p lies in the future cone."""
    return bool(b_eval(w, future_reference(p)) < 0.0)


@dataclass(frozen=True)
class LinearPoint:
    """A point of the quadric (Q = -1), renormalized on construction.

    Drift with |Q + 1| above the quadric tolerance is absorbed by dividing
    by sqrt(-Q); construction fails for Q >= 0.
    """

    v: np.ndarray

    def __init__(self, v):
        v = as_vec4(np.array(v, dtype=float))
        q = q_eval(v)
        if q >= 0.0:
            raise InvalidPoint(f"Q(v) = {q:.3g} >= 0, not a point of the quadric")
        if abs(q + 1.0) > config.TOL_QUADRIC:
            v = v / np.sqrt(-q)
        v.flags.writeable = False
        object.__setattr__(self, "v", v)

    @property
    def q(self) -> float:
        return float(q_eval(self.v))

    def sl2(self) -> "SL2Matrix":
        return SL2Matrix.from_matrix(abcd_matrix(self.v))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.v, dtype=dtype)


@dataclass(frozen=True)
class ProjPoint:
    """A positively homogeneous class in S^3, stored Euclid-normalized.

    Only positive rescaling is quotiented out, so antipodal points stay
    distinct (this is S^3, not RP^3).
    """

    v: np.ndarray

    def __init__(self, v):
        v = as_vec4(np.array(v, dtype=float))
        n = np.linalg.norm(v)
        if n == 0.0 or not np.isfinite(n):
            raise InvalidPoint("zero or non-finite representative")
        v = v / n
        v.flags.writeable = False
        object.__setattr__(self, "v", v)

    @property
    def q_sign(self) -> int:
        """Sign of Q at the class: -1 interior, 0 boundary, +1 exterior."""
        q = float(q_eval(self.v))
        if abs(q) <= config.TOL_CAUSAL:
            return 0
        return -1 if q < 0 else 1

    @property
    def is_boundary(self) -> bool:
        return self.q_sign == 0

    @property
    def is_interior(self) -> bool:
        return self.q_sign < 0

    def to_linear(self) -> LinearPoint:
        return LinearPoint(self.v)

    @staticmethod
    def from_linear(p: LinearPoint) -> "ProjPoint":
        return ProjPoint(p.v)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.v, dtype=dtype)


@dataclass(frozen=True)
class SL2Matrix:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > config.TOL_DET:
            raise InvalidPoint(f"det = {det:.12g}, not in SL(2, R)")

    @staticmethod
    def from_matrix(m) -> "SL2Matrix":
        m = np.asarray(m, dtype=float)
        return SL2Matrix(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "SL2Matrix") -> "SL2Matrix":
        return SL2Matrix.from_matrix(self.matrix @ other.matrix)

    def inv(self) -> "SL2Matrix":
        return SL2Matrix(self.d, -self.b, -self.c, self.a)

    def to_vec4(self) -> np.ndarray:
        return from_abcd(np.array([self.a, self.b, self.c, self.d]))

    @staticmethod
    def identity() -> "SL2Matrix":
        return SL2Matrix(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def diag_exp(t: float) -> "SL2Matrix":
        """One-parameter diagonal subgroup diag(e^t, e^-t)."""
        return SL2Matrix(np.exp(t), 0.0, 0.0, np.exp(-t))

    @staticmethod
    def rotation(theta: float) -> "SL2Matrix":
        return SL2Matrix(np.cos(theta), np.sin(theta), -np.sin(theta), np.cos(theta))


def _pair_matrix_abcd(gl: SL2Matrix, gr: SL2Matrix) -> np.ndarray:
    """4x4 matrix of g -> gl g gr^{-1} on (a, b, c, d) coordinates."""
    gl_m = gl.matrix
    gr_inv = gr.inv().matrix
    cols = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        m = np.array([[e[0], e[1]], [e[2], e[3]]])
        out = gl_m @ m @ gr_inv
        cols.append([out[0, 0], out[0, 1], out[1, 0], out[1, 1]])
    return np.array(cols).T


@dataclass(frozen=True)
class Isometry:
    """Element of the identity component of the isometry group.

    Stored as the 4x4 matrix acting on x-coordinates; when built from an
    SL(2, R) x SL(2, R) pair the pair is kept alongside.
    """

    m: np.ndarray
    pair: tuple[SL2Matrix, SL2Matrix] | None = field(default=None)

    def __init__(self, m, pair=None):
        m = np.array(m, dtype=float)
        if m.shape != (4, 4):
            raise InvalidIsometry(f"expected 4x4 matrix, got {m.shape}")
        defect = np.max(np.abs(m.T @ G_METRIC @ m - G_METRIC))
        if defect > config.TOL_ISOM:
            raise InvalidIsometry(f"m^T G m - G defect {defect:.3g} exceeds tolerance")
        m.flags.writeable = False
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "pair", pair)

    @staticmethod
    def from_pair(gl: SL2Matrix, gr: SL2Matrix) -> "Isometry":
        m = _T_ABCD_INV @ _pair_matrix_abcd(gl, gr) @ _T_ABCD
        return Isometry(m, pair=(gl, gr))

    @staticmethod
    def identity() -> "Isometry":
        return Isometry(np.eye(4), pair=(SL2Matrix.identity(), SL2Matrix.identity()))

    def __matmul__(self, other: "Isometry") -> "Isometry":
        pair = None
        if self.pair is not None and other.pair is not None:
            pair = (self.pair[0] @ other.pair[0], self.pair[1] @ other.pair[1])
        return Isometry(self.m @ other.m, pair=pair)

    def inv(self) -> "Isometry":
        pair = None
        if self.pair is not None:
            pair = (self.pair[0].inv(), self.pair[1].inv())
        # Q-orthogonal inverse: m^{-1} = G m^T G.
        return Isometry(G_METRIC @ self.m.T @ G_METRIC, pair=pair)

    def apply_vec(self, v) -> np.ndarray:
        return as_vec4(v) @ self.m.T

    def __call__(self, p):
        if isinstance(p, LinearPoint):
            return LinearPoint(self.apply_vec(p.v))
        if isinstance(p, ProjPoint):
            return ProjPoint(self.apply_vec(p.v))
        return self.apply_vec(p)


def apply_isometry(sigma: Isometry, p: LinearPoint) -> LinearPoint:
    """Apply sigma to a quadric point; the image is renormalized to Q = -1.

    When the SL(2, R) pair is available the matrix action agrees with
    gL g gR^{-1} on the (a, b, c, d) picture by construction.
    """
    return sigma(p)


@dataclass(frozen=True)
class DualPlane:
    """Dual surface of a quadric point p: {q : B_Q(p, q) = 0}.

    The intersection with the quadric is a disjoint pair of spacelike
    totally geodesic planes; `sample_points` parametrizes both sheets.
    """

    p: LinearPoint
    frame: np.ndarray  # rows: timelike unit e0, spacelike units e1, e2 spanning p-perp

    def functional(self, q) -> float | np.ndarray:
        return b_eval(self.p.v, np.asarray(q, dtype=float))

    def sample_points(self, n_r: int = 3, n_psi: int = 8, r_max: float = 1.5) -> list[LinearPoint]:
        e0, e1, e2 = self.frame
        pts = []
        for sheet in (+1.0, -1.0):
            for i in range(n_r):
                r = r_max * i / max(n_r - 1, 1)
                for j in range(n_psi):
                    psi = 2.0 * np.pi * j / n_psi
                    v = sheet * np.cosh(r) * e0 + np.sinh(r) * (np.cos(psi) * e1 + np.sin(psi) * e2)
                    pts.append(LinearPoint(v))
        return pts


def q_orthonormal_frame(p: LinearPoint) -> np.ndarray:
    """Extend p to a Q-orthonormal frame (p; e0 timelike; e1, e2 spacelike).

    Gram-Schmidt with respect to B_Q, seeded from the standard basis in
    index order; near-degenerate seeds are skipped.  Returns rows
    [p, e0, e1, e2] with Q = (-1, -1, +1, +1).
    """
    frame = [np.array(p.v, dtype=float)]
    signs = [-1.0]
    for k in range(4):
        seed = np.zeros(4)
        seed[k] = 1.0
        w = seed.copy()
        for f, s in zip(frame, signs):
            w = w - s * b_eval(w, f) * f
        qw = float(q_eval(w))
        if abs(qw) <= 1e-8:
            continue
        w = w / np.sqrt(abs(qw))
        frame.append(w)
        signs.append(-1.0 if qw < 0 else 1.0)
        if len(frame) == 4:
            break
    if len(frame) < 4:
        raise BadTangent("could not complete a Q-orthonormal frame")
    timelike = [f for f, s in zip(frame[1:], signs[1:]) if s < 0]
    spacelike = [f for f, s in zip(frame[1:], signs[1:]) if s > 0]
    if len(timelike) != 1 or len(spacelike) != 2:
        raise BadTangent("frame completion produced the wrong signature")
    return np.array([frame[0], timelike[0], spacelike[0], spacelike[1]])


def dual_surface(p: LinearPoint) -> DualPlane:
    frame = q_orthonormal_frame(p)
    return DualPlane(p=p, frame=frame[1:])


def isometry_fixing_frame(p: LinearPoint) -> Isometry:
    """A Q-isometry sending p to (1, 0, 0, 0), built from a B_Q-orthonormal
    frame at p.  For p = (1, 0, 0, 0) the construction returns the identity.
    """
    frame = q_orthonormal_frame(p)  # rows p, e0, e1, e2 with signature (-,-,+,+)
    f_cols = np.array([frame[0], frame[1], frame[2], frame[3]]).T
    sig = np.diag([-1.0, -1.0, 1.0, 1.0])
    f_inv = sig @ f_cols.T @ G_METRIC
    return Isometry(f_inv)
