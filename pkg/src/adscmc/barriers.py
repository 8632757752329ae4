"""Lorentzian epsilon-neighborhoods, curvature certification, polyhedral
re-approximation, convex smoothing, and the barrier pipeline.

All curved bodies are height fields over a planar grid in the chart of
the base point; exact intersections of curved half-spaces are replaced by
pointwise min/max envelopes over the finite family of support planes
coming from hull faces.

Chart time runs toward -z, so the past (convex) sheet of every body is
the upper graph and the future (concave) sheet the lower graph.  The
pipeline ends with the past barrier at strictly negative mean curvature
and the future barrier at strictly positive mean curvature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import b_eval, q_eval
from .causal import chart_lift_interior
from .errors import (
    EpsBudgetExceeded,
    EpsTooLarge,
    FlatCurve,
    NotConvexInput,
    NotSpacelikeHere,
    PipelineFailed,
)
from .hull import (
    HullSplit,
    PolySurfaceMesh,
    convex_hull,
    hull_of_boundary_curve,
    plane_dual_vector,
    spacelike_support_planes,
)
from .meancurv import chart_graph, graph_from_parametric, mean_curvature, normal_offset
from .surfaces import BoundaryCurve


# ---------------------------------------------------------------------------
# Spacelike planes and their epsilon half-space regions.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpacelikePlane:
    """A spacelike totally geodesic plane, stored as its unit timelike dual
    vector v, oriented so that B_Q(v, q) > 0 on the future side."""

    v: np.ndarray

    def __init__(self, v):
        v = np.array(v, dtype=float)
        q = float(q_eval(v))
        if q >= 0.0:
            raise NotSpacelikeHere("dual vector is not timelike: plane not spacelike")
        v = v / np.sqrt(-q)
        v.flags.writeable = False
        object.__setattr__(self, "v", v)

    @staticmethod
    def from_chart_plane(normal, offset, future_point) -> "SpacelikePlane":
        """Plane n . (x, y, z) = d in the chart; future_point is a chart
        point on the future side, fixing the orientation of the dual."""
        plane = SpacelikePlane(plane_dual_vector(normal, offset))
        fx, fy, fz = future_point
        lift = chart_lift_interior(np.asarray(fx, dtype=float), np.asarray(fy, dtype=float), np.asarray(fz, dtype=float))
        if float(b_eval(plane.v, lift)) < 0.0:
            plane = SpacelikePlane(-plane.v)
        return plane

    def time_level(self, x, y, z):
        """B_Q(v, lift(x, y, z)): the sine of the signed time distance to
        the plane, positive toward the future."""
        lift = chart_lift_interior(x, y, z)
        return b_eval(np.broadcast_to(self.v, lift.shape), lift)

    def height_at_level(self, x, y, level: float):
        """Chart height z(x, y) of the level surface {B_Q(v, lift) = level}.

        Columns missed by the level surface return NaN.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        v1, v2, v3, v4 = self.v
        l0 = -v1 + v3 * x + v4 * y
        c = float(level)
        if c == 0.0:
            return l0 / v2
        a_coef = v2**2 - c**2
        b_coef = -2.0 * l0 * v2
        c_coef = l0**2 - c**2 * (1.0 - x**2 - y**2)
        disc = b_coef**2 - 4.0 * a_coef * c_coef

        def valid(z):
            return np.isfinite(z) & ((l0 - v2 * z) * c > 0) & (1.0 + z**2 - x**2 - y**2 > 0)

        with np.errstate(invalid="ignore", divide="ignore"):
            sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
            z1 = (-b_coef + sq) / (2.0 * a_coef)
            z2 = (-b_coef - sq) / (2.0 * a_coef)
        return np.where(valid(z1), z1, np.where(valid(z2), z2, np.nan))


@dataclass(frozen=True)
class EpsHalfspace:
    """One side of a spacelike plane thickened by the eps-slab on the other.

    side='past' is (future of P) union (eps-past of P): membership is
    B_Q(v, lift) >= -sin(eps), with boundary at level -sin(eps) bulging
    toward the past.  side='future' is the mirror image.  For P = (z = 0)
    and side='past' the boundary is z = tan(eps) sqrt(1 - x^2 - y^2); at
    eps = pi/4 this is the unit upper hemisphere, with constant normal
    time distance eps to the plane and tangent-ball radius 1/tan(eps).
    """

    plane: SpacelikePlane
    eps: float
    side: str

    def __post_init__(self):
        if not (0.0 < self.eps < np.pi / 2.0):
            raise EpsTooLarge(f"eps = {self.eps} outside (0, pi/2)")
        if self.side not in ("past", "future"):
            raise ValueError("side must be 'past' or 'future'")

    @property
    def level(self) -> float:
        return -np.sin(self.eps) if self.side == "past" else float(np.sin(self.eps))

    def contains(self, x, y, z, tol: float = 1e-12):
        b = self.plane.time_level(x, y, z)
        if self.side == "past":
            return b >= self.level - tol
        return b <= self.level + tol

    def boundary_height(self, x, y):
        return self.plane.height_at_level(x, y, self.level)


def eps_halfspace(plane: SpacelikePlane, eps: float, side: str) -> EpsHalfspace:
    """Region bounded by the constant-time-distance surface of a plane."""
    return EpsHalfspace(plane=plane, eps=eps, side=side)


def plane_z0() -> SpacelikePlane:
    """The totally geodesic plane z = 0 (future side z < 0)."""
    return SpacelikePlane.from_chart_plane((0.0, 0.0, 1.0), 0.0, (0.0, 0.0, -1e-2))


# ---------------------------------------------------------------------------
# Height fields over the chart grid.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeightField:
    """Sampled graph z(x, y) over a uniform planar grid with a validity
    mask; side='upper' graphs bound a convex body from the past (concave
    values), side='lower' from the future (convex values)."""

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    mask: np.ndarray
    side: str = "upper"

    @property
    def spacing(self) -> tuple[float, float]:
        return float(self.xs[1] - self.xs[0]), float(self.ys[1] - self.ys[0])

    def meshgrid(self):
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def interior_mask(self) -> np.ndarray:
        """Nodes whose 4-neighborhood is valid."""
        m = self.mask & np.isfinite(self.values)
        out = np.zeros_like(m)
        out[1:-1, 1:-1] = m[1:-1, 1:-1] & m[2:, 1:-1] & m[:-2, 1:-1] & m[1:-1, 2:] & m[1:-1, :-2]
        return out

    def with_values(self, values) -> "HeightField":
        return HeightField(self.xs, self.ys, np.asarray(values, dtype=float), self.mask, self.side)


def make_grid(nx: int, ny: int, r_max: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = np.linspace(-r_max, r_max, nx)
    ys = np.linspace(-r_max, r_max, ny)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    mask = xx**2 + yy**2 <= r_max**2
    return xs, ys, mask


def realize_heightfield(evaluate, xs, ys, mask, side: str) -> HeightField:
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    z = np.full(xx.shape, np.nan)
    z[mask] = evaluate(xx[mask], yy[mask])
    return HeightField(xs=xs, ys=ys, values=z, mask=mask & np.isfinite(z), side=side)


def directional_second_differences(field: HeightField):
    """Min over interior nodes of the four directional second differences
    (axes and diagonals), normalized by the squared step.  Convex graphs
    have these nonnegative exactly, at any grid spacing."""
    hx, hy = field.spacing
    z = np.where(field.mask, field.values, np.nan)
    c = z[1:-1, 1:-1]
    diffs = [
        (z[2:, 1:-1] - 2 * c + z[:-2, 1:-1]) / hx**2,
        (z[1:-1, 2:] - 2 * c + z[1:-1, :-2]) / hy**2,
        (z[2:, 2:] - 2 * c + z[:-2, :-2]) / (hx**2 + hy**2),
        (z[2:, :-2] - 2 * c + z[:-2, 2:]) / (hx**2 + hy**2),
    ]
    stacked = np.stack(diffs)
    ok = np.all(np.isfinite(stacked), axis=0)
    if not np.any(ok):
        raise ValueError("no interior nodes")
    return float(np.min(stacked[:, ok]))


def check_discrete_convexity(field: HeightField, tol: float = 1e-9) -> bool:
    """Directional second-difference sign test matching the field's side:
    'lower' graphs must be convex, 'upper' graphs concave."""
    worst = directional_second_differences(field)
    if field.side == "lower":
        return bool(worst >= -tol)
    best = -directional_second_differences(
        HeightField(field.xs, field.ys, -field.values, field.mask, "lower")
    )
    return bool(best <= tol)


# ---------------------------------------------------------------------------
# Epsilon neighborhood of a hull split: envelope over support planes.
# ---------------------------------------------------------------------------


def _mesh_face_planes(mesh: PolySurfaceMesh) -> list[SpacelikePlane]:
    """Oriented spacelike planes of the mesh faces.

    The future side of every near-horizontal chart plane is below it
    (chart time runs toward -z), regardless of which sheet the face
    belongs to.
    """
    planes = []
    for k in range(mesh.n_faces):
        n = mesh.normals[k]
        d = mesh.offsets[k]
        verts = mesh.vertices[mesh.faces[k]]
        centroid = verts.mean(axis=0)
        future_point = (centroid[0], centroid[1], centroid[2] - 1e-3)
        planes.append(SpacelikePlane.from_chart_plane(n, d, future_point))
    return planes


@dataclass(frozen=True)
class EnvelopeSheet:
    """Pointwise envelope of constant-time-distance surfaces over a family
    of support planes; the boundary sheet of the eps-neighborhood body."""

    regions: tuple[EpsHalfspace, ...]
    side: str  # 'upper': min of past-bulging boundaries; 'lower': max

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        heights = np.stack([r.boundary_height(x, y) for r in self.regions], axis=0)
        with np.errstate(invalid="ignore"):
            if self.side == "upper":
                return np.nanmin(heights, axis=0)
            return np.nanmax(heights, axis=0)


def eps_neighborhood_body(
    split: HullSplit,
    eps: float,
    xs=None,
    ys=None,
    mask=None,
    curve: BoundaryCurve | None = None,
    nx: int = 96,
    ny: int = 96,
    r_max: float = 0.9,
) -> tuple[HeightField, HeightField, EnvelopeSheet, EnvelopeSheet]:
    """Boundary sheets of the Lorentzian eps-neighborhood of the hull.

    The past sheet is the pointwise min over upper-face support planes of
    the past-bulging constant-distance surfaces; the future sheet is the
    mirrored max.  When a curve is supplied, every realized node is
    required to stay inside its black domain (EpsBudgetExceeded otherwise).
    Returns (past_field, future_field, past_sheet, future_sheet).
    """
    if xs is None:
        xs, ys, mask = make_grid(nx, ny, r_max)
    upper_planes = _mesh_face_planes(split.upper)
    lower_planes = _mesh_face_planes(split.lower)
    past_sheet = EnvelopeSheet(tuple(eps_halfspace(p, eps, "past") for p in upper_planes), "upper")
    future_sheet = EnvelopeSheet(tuple(eps_halfspace(p, eps, "future") for p in lower_planes), "lower")
    past_field = realize_heightfield(past_sheet, xs, ys, mask, "upper")
    future_field = realize_heightfield(future_sheet, xs, ys, mask, "lower")
    if np.any(past_field.mask != mask) or np.any(future_field.mask != mask):
        raise EpsBudgetExceeded("envelope is not a graph over the requested grid")
    if curve is not None:
        for fld in (past_field, future_field):
            if not _field_in_black_domain(fld, curve):
                raise EpsBudgetExceeded("eps-neighborhood node left the black domain")
    return past_field, future_field, past_sheet, future_sheet


def _field_in_black_domain(field: HeightField, curve: BoundaryCurve) -> bool:
    xx, yy = field.meshgrid()
    m = field.mask
    pts = chart_lift_interior(xx[m], yy[m], field.values[m])
    samples = curve.sample_vectors()
    samples = samples / np.linalg.norm(samples, axis=-1, keepdims=True)
    vals = pts @ (samples * np.array([-1.0, -1.0, 1.0, 1.0])).T
    return bool(np.all(vals < 0.0))


# ---------------------------------------------------------------------------
# Uniform curvature certification by tangent-ball containment.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureCert:
    radius: float
    n_certified: int
    witness_centers: np.ndarray  # (n, 3)


@dataclass(frozen=True)
class CurvatureFailure:
    radius: float
    node: tuple[int, int]
    overshoot: float


def _sphere_fit_direction(p, patch, n0):
    """Direction from p to the center of the least-squares sphere through
    the patch, falling back to n0 for (near-)flat patches."""
    a = np.column_stack([2.0 * patch, np.ones(len(patch))])
    b = np.sum(patch**2, axis=1)
    try:
        sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    except np.linalg.LinAlgError:
        return n0
    v = p - sol[:3]
    nrm = np.linalg.norm(v)
    if not np.isfinite(nrm) or nrm < 1e-12:
        return n0
    n = v / nrm
    return -n if n @ n0 < 0 else n


def _overshoot(p, patch, radius, n, target):
    c = p - radius * n
    dist = np.linalg.norm(patch - c, axis=1)
    k = int(np.argmax(dist))
    return float(dist[k]) - target, k, c, dist[k]


def _refine_ball_center(p, patch, radius, n0, rel_tol, iters: int = 80):
    """Search for a ball center at distance radius from p whose ball
    contains the patch.  The certificate only needs existence: both the
    finite-difference normal and the osculating sphere-fit direction are
    tried, and the better one is polished on the tangency sphere."""
    target = radius * (1.0 + rel_tol)
    candidates = [n0, _sphere_fit_direction(p, patch, n0)]
    best_n, best_over = None, np.inf
    for cand in candidates:
        over, _, _, _ = _overshoot(p, patch, radius, cand, target)
        if over < best_over:
            best_over, best_n = over, cand.copy()
        if best_over <= 0.0:
            return best_n, best_over
    n = best_n.copy()
    gain = 8.0
    for _ in range(iters):
        over, k, c, dk = _overshoot(p, patch, radius, n, target)
        if over <= 0.0:
            return n, over
        if over < best_over:
            best_over = over
            best_n = n.copy()
        else:
            gain = max(gain * 0.5, 1.0)
        c_new = c + gain * (dk - radius) * (patch[k] - c) / dk
        v = p - c_new
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            break
        n = v / nrm
    return best_n, best_over


def certify_uniform_curvature(
    field: HeightField,
    radius: float,
    k_ring: int = 3,
    rel_tol: float = 1e-9,
) -> CurvatureCert | CurvatureFailure:
    """Tangent-ball containment test at every interior node.

    At each node there must exist a ball of the given radius, tangent at
    the node on the convex side (below upper sheets, above lower sheets),
    containing the k-ring neighborhood sample.  The center starts along
    the finite-difference normal and is refined on the tangency sphere.
    Success returns witness centers, failure the worst offending node.
    """
    hx, hy = field.spacing
    z = field.values
    xx, yy = field.meshgrid()
    m = field.mask & np.isfinite(z)
    ok = np.zeros_like(m)
    k = k_ring
    ok[k:-k, k:-k] = m[k:-k, k:-k]
    for di in range(-k, k + 1):
        for dj in range(-k, k + 1):
            ok[k:-k, k:-k] &= m[k + di : m.shape[0] - k + di, k + dj : m.shape[1] - k + dj]
    idx = np.argwhere(ok)
    if len(idx) == 0:
        raise ValueError("no certifiable interior nodes")
    zx = (z[2:, 1:-1] - z[:-2, 1:-1]) / (2 * hx)
    zy = (z[1:-1, 2:] - z[1:-1, :-2]) / (2 * hy)
    grad = np.full(z.shape + (2,), np.nan)
    grad[1:-1, 1:-1, 0] = zx
    grad[1:-1, 1:-1, 1] = zy
    sign = 1.0 if field.side == "upper" else -1.0
    centers = []
    for i, j in idx:
        g = grad[i, j]
        nrm = np.array([-g[0], -g[1], 1.0])
        nrm = sign * nrm / np.linalg.norm(nrm)
        p = np.array([xx[i, j], yy[i, j], z[i, j]])
        si = slice(i - k, i + k + 1)
        sj = slice(j - k, j + k + 1)
        patch = np.stack([xx[si, sj], yy[si, sj], z[si, sj]], axis=-1).reshape(-1, 3)
        n_best, overshoot = _refine_ball_center(p, patch, radius, nrm, rel_tol)
        if overshoot > 0.0:
            return CurvatureFailure(radius=radius, node=(int(i), int(j)), overshoot=overshoot)
        centers.append(p - radius * n_best)
    return CurvatureCert(radius=radius, n_certified=len(centers), witness_centers=np.array(centers))


# ---------------------------------------------------------------------------
# Polyhedral re-approximation of a certified convex sheet.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolyhedralApprox:
    mesh: PolySurfaceMesh
    sheet_faces: np.ndarray  # indices of faces on the sampled side
    hausdorff: float

    def sheet_mesh(self) -> PolySurfaceMesh:
        keep = np.zeros(self.mesh.n_faces, dtype=bool)
        keep[self.sheet_faces] = True
        return self.mesh.submesh(keep)


def polyhedral_approx(evaluate, delta: float, r_sample: float, side: str) -> PolyhedralApprox:
    """Convex hull of a delta-dense sample of a convex graph sheet.

    Density is measured along the surface (3D), so the chord-to-surface
    distance of the resulting facets is at most about delta^2 / (2 R) for
    a sheet more curved than a sphere of radius R.  The sheet-side facets
    are the ones whose outward normal points out of the body (up for
    'upper' sheets); the reported Hausdorff error is the maximal distance
    from a fine surface probe to its supporting facet plane.
    """
    probe = np.linspace(-r_sample, r_sample, 61)
    px, py = np.meshgrid(probe, probe, indexing="ij")
    pm = px**2 + py**2 <= r_sample**2
    with np.errstate(invalid="ignore"):
        gx, gy = np.gradient(_masked_eval(evaluate, px, py, pm), probe, probe)
    slant = np.sqrt(1.0 + np.nan_to_num(gx) ** 2 + np.nan_to_num(gy) ** 2)
    max_slant = float(np.nanmax(slant[pm]))
    step = delta / max_slant
    n_side = max(int(np.ceil(2 * r_sample / step)) + 1, 4)
    axis = np.linspace(-r_sample, r_sample, n_side)
    sx, sy = np.meshgrid(axis, axis, indexing="ij")
    sm = sx**2 + sy**2 <= r_sample**2
    # ring of rim samples closes the patch
    n_rim = max(int(np.ceil(2 * np.pi * r_sample / step)) + 1, 8)
    rim_phi = 2 * np.pi * np.arange(n_rim) / n_rim
    rx = r_sample * np.cos(rim_phi)
    ry = r_sample * np.sin(rim_phi)
    xs = np.concatenate([sx[sm], rx])
    ys = np.concatenate([sy[sm], ry])
    zs = evaluate(xs, ys)
    good = np.isfinite(zs)
    pts = np.stack([xs[good], ys[good], zs[good]], axis=-1)
    mesh = convex_hull(pts)
    nz = mesh.normals[:, 2]
    sheet_faces = np.nonzero(nz > 1e-9 if side == "upper" else nz < -1e-9)[0]
    if len(sheet_faces) == 0:
        raise PipelineFailed("polyhedral_approx", "no sheet-side facets")

    # Hausdorff: probe the surface finely; distance to the active facet plane.
    fx = px[pm]
    fy = py[pm]
    fz = evaluate(fx, fy)
    ok = np.isfinite(fz)
    probe_pts = np.stack([fx[ok], fy[ok], fz[ok]], axis=-1)
    sheet = mesh.submesh(np.isin(np.arange(mesh.n_faces), sheet_faces))
    # Distance from each probe to its supporting facet plane (the plane
    # achieving the envelope at the probe column): vertical gap scaled by
    # the plane's |nz| component.
    heights = (
        sheet.offsets[None, :]
        - np.multiply.outer(probe_pts[:, 0], sheet.normals[:, 0])
        - np.multiply.outer(probe_pts[:, 1], sheet.normals[:, 1])
    ) / sheet.normals[None, :, 2]
    active = np.argmin(heights, axis=1) if side == "upper" else np.argmax(heights, axis=1)
    env = heights[np.arange(len(probe_pts)), active]
    gaps = np.abs(env - probe_pts[:, 2]) * np.abs(sheet.normals[active, 2])
    return PolyhedralApprox(mesh=mesh, sheet_faces=sheet_faces, hausdorff=float(np.nanmax(gaps)))


def _masked_eval(evaluate, px, py, pm):
    out = np.full(px.shape, np.nan)
    out[pm] = evaluate(px[pm], py[pm])
    return out


# ---------------------------------------------------------------------------
# Smoothing profile and convex-graph smoothing.
# ---------------------------------------------------------------------------


def _smoothstep_integral(u):
    """Integral of 3t^2 - 2t^3 from 0 to u."""
    return u**3 - 0.5 * u**4


_BUMP_TABLE_N = 4096
_bump_table_cache: dict[str, np.ndarray] = {}


def _bump_ratio(u):
    """C-infinity step: sigma(u) / (sigma(u) + sigma(1-u)), sigma = exp(-1/u)."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return a / (a + b)


def _bump_integral_table() -> np.ndarray:
    if "table" not in _bump_table_cache:
        u = np.linspace(0.0, 1.0, _BUMP_TABLE_N + 1)
        vals = _bump_ratio(u)
        # cumulative Simpson on a uniform grid
        du = 1.0 / _BUMP_TABLE_N
        cum = np.zeros_like(u)
        cum[1:] = np.cumsum(0.5 * (vals[1:] + vals[:-1]) * du)
        # symmetry pins the endpoint exactly
        cum *= 0.5 / cum[-1]
        _bump_table_cache["table"] = cum
    return _bump_table_cache["table"]


def _bump_integral(u):
    table = _bump_integral_table()
    u = np.clip(u, 0.0, 1.0)
    pos = u * _BUMP_TABLE_N
    i0 = np.minimum(pos.astype(int), _BUMP_TABLE_N - 1)
    w = pos - i0
    return table[i0] * (1 - w) + table[i0 + 1] * w


@dataclass(frozen=True)
class SmoothingProfile:
    """Scalar profile phi: constant 3 eta / 2 on [0, eta], identity beyond
    2 eta, with a convex monotone ramp in between (phi' rises 0 -> 1 with
    integral eta / 2, which makes the pieces join exactly)."""

    eta: float
    kind: str = "smoothstep"

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.kind not in ("smoothstep", "bump"):
            raise ValueError("kind must be 'smoothstep' or 'bump'")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        eta = self.eta
        u = np.clip((t - eta) / eta, 0.0, 1.0)
        ramp = _smoothstep_integral(u) if self.kind == "smoothstep" else _bump_integral(u)
        out = np.where(
            t <= eta,
            1.5 * eta,
            np.where(t >= 2 * eta, t, 1.5 * eta + eta * ramp),
        )
        return float(out) if out.ndim == 0 else out

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        eta = self.eta
        u = np.clip((t - eta) / eta, 0.0, 1.0)
        slope = (3 * u**2 - 2 * u**3) if self.kind == "smoothstep" else _bump_ratio(u)
        out = np.where(t <= eta, 0.0, np.where(t >= 2 * eta, 1.0, slope))
        return float(out) if out.ndim == 0 else out


def smooth_profile(eta: float, kind: str = "smoothstep") -> SmoothingProfile:
    return SmoothingProfile(eta=eta, kind=kind)


def smooth_convex_graph(field: HeightField, profile: SmoothingProfile) -> HeightField:
    """Compose a nonnegative convex side-graph with the smoothing profile.

    The output dominates the input, stays within 2 eta of it, agrees with
    it where the input is at least 2 eta, is constant where the input is
    at most eta, and remains convex.
    """
    vals = field.values
    m = field.mask & np.isfinite(vals)
    if np.nanmin(vals[m]) < -1e-12:
        raise NotConvexInput("side graph must be nonnegative over its support plane")
    probe = HeightField(field.xs, field.ys, np.where(m, vals, np.nan), field.mask, "lower")
    worst = directional_second_differences(probe)
    if worst < -1e-7:
        raise NotConvexInput(f"negative directional second difference {worst:.3g}")
    out = np.where(m, profile(np.maximum(vals, 0.0)), np.nan)
    return HeightField(field.xs, field.ys, out, field.mask, side="lower")


# ---------------------------------------------------------------------------
# Sequential per-side smoothing of a polyhedral sheet (closed form).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothedSheet:
    """Polyhedral sheet (plane envelope) smoothed by one profile step per
    face, replayed in face order at evaluation time.

    side='upper': the sheet is the min-envelope of its face planes; every
    step pushes the graph toward the future (down) by composing the
    normal-distance-to-plane coordinate with the profile.  side='lower'
    is the mirror image.
    """

    normals: np.ndarray  # (F, 3) unit, oriented out of the body
    offsets: np.ndarray  # (F,)
    profile: SmoothingProfile
    side: str

    def base(self, x, y):
        n = self.normals
        d = self.offsets
        heights = (d[None, :] - np.multiply.outer(x, n[:, 0]) - np.multiply.outer(y, n[:, 1])) / n[None, :, 2]
        return heights.min(axis=-1) if self.side == "upper" else heights.max(axis=-1)

    def __call__(self, x, y):
        from . import _kernels

        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        sgn = 1.0 if self.side == "upper" else -1.0
        if self.profile.kind == "smoothstep":
            shape = np.broadcast(x, y).shape
            flat = _kernels.smoothed_sheet_eval(
                self.normals, self.offsets, self.profile.eta, sgn, np.ravel(x), np.ravel(y)
            )
            return flat.reshape(shape) if shape else float(flat[0])
        z = self.base(x, y)
        for k in range(len(self.normals)):
            n = self.normals[k]
            d = self.offsets[k]
            nz = abs(n[2])
            plane_h = (d - n[0] * x - n[1] * y) / n[2]
            gap = sgn * (plane_h - z) * nz  # normal distance to the face plane
            z = plane_h - sgn * self.profile(gap) / nz
        return z


def dedupe_planes(normals, offsets, height_tol: float, r_probe: float) -> np.ndarray:
    """Indices of a reduced plane family whose envelope differs from the
    full one by at most height_tol: planes are dropped when an already
    kept plane stays within the tolerance at five probe columns."""
    probes = np.array(
        [[0.0, 0.0], [r_probe, 0.0], [-r_probe, 0.0], [0.0, r_probe], [0.0, -r_probe]]
    )
    heights = (
        offsets[None, :]
        - np.multiply.outer(probes[:, 0], normals[:, 0])
        - np.multiply.outer(probes[:, 1], normals[:, 1])
    ) / normals[None, :, 2]
    order = np.argsort(heights[0])
    kept: list[int] = []
    kept_heights = []
    for idx in order:
        h = heights[:, idx]
        if kept and np.min(np.max(np.abs(np.array(kept_heights) - h[None, :]), axis=1)) <= height_tol:
            continue
        kept.append(int(idx))
        kept_heights.append(h)
    return np.array(sorted(kept), dtype=int)


def smooth_sheet(mesh_sheet: PolySurfaceMesh, profile: SmoothingProfile, side: str, r_probe: float = 0.9) -> SmoothedSheet:
    """Smoothing stage over the sheet's face planes.

    Near-duplicate face planes (envelope difference below eta/4) carry no
    extra geometry and are dropped before the sequential smoothing pass.
    """
    keep = dedupe_planes(mesh_sheet.normals, mesh_sheet.offsets, profile.eta / 4.0, r_probe)
    return SmoothedSheet(
        normals=mesh_sheet.normals[keep].copy(),
        offsets=mesh_sheet.offsets[keep].copy(),
        profile=profile,
        side=side,
    )


# ---------------------------------------------------------------------------
# The barrier pipeline.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BarrierCertificate:
    h_minus_max: float
    h_plus_min: float
    spacelike_margin: float
    curvature_R: float
    ordering_margin: float
    in_black_domain: bool
    support_planes_spacelike: bool

    @property
    def ok(self) -> bool:
        return bool(
            self.h_minus_max < 0.0
            and self.h_plus_min > 0.0
            and self.spacelike_margin > 0.0
            and self.ordering_margin > 0.0
            and self.in_black_domain
            and self.support_planes_spacelike
            and np.isfinite(self.curvature_R)
        )

    def to_dict(self) -> dict:
        return {
            "h_minus_max": self.h_minus_max,
            "h_plus_min": self.h_plus_min,
            "spacelike_margin": self.spacelike_margin,
            "curvature_R": self.curvature_R,
            "ordering_margin": self.ordering_margin,
            "in_black_domain": self.in_black_domain,
            "support_planes_spacelike": self.support_planes_spacelike,
            "ok": self.ok,
        }


@dataclass(frozen=True)
class BarrierResult:
    sigma_minus: HeightField  # past barrier (upper graph), H < 0
    sigma_plus: HeightField  # future barrier (lower graph), H > 0
    certificate: BarrierCertificate
    split: HullSplit
    h_minus: np.ndarray
    h_plus: np.ndarray


def _certify_radius_ladder(field: HeightField, base_radius: float, k_ring: int = 3):
    for factor in (1.05, 1.2, 1.5, 2.0, 3.0, 5.0):
        cert = certify_uniform_curvature(field, base_radius * factor, k_ring=k_ring)
        if isinstance(cert, CurvatureCert):
            return cert
    return cert


def build_barriers(
    curve: BoundaryCurve,
    eps: float,
    delta: float,
    eta: float,
    eps2: float,
    nx: int = 96,
    ny: int = 96,
    r_max: float = 0.9,
    profile_kind: str = "smoothstep",
) -> BarrierResult:
    """Hull -> eps-neighborhood -> polyhedral approximation -> per-side
    smoothing -> outward normal offset, with numeric certificates.

    The past barrier is offset toward the past and certified at strictly
    negative mean curvature; the future barrier mirrored.  Stage failures
    raise PipelineFailed with the stage tag.
    """
    xs, ys, mask = make_grid(nx, ny, r_max)

    try:
        split = hull_of_boundary_curve(curve)
        for mesh in (split.upper, split.lower):
            ok, offenders = spacelike_support_planes(mesh)
            if not ok:
                raise PipelineFailed("hull", f"non-spacelike support planes {offenders}")
    except (PipelineFailed, FlatCurve):
        raise
    except Exception as exc:
        raise PipelineFailed("hull", str(exc)) from exc

    try:
        past_field, future_field, past_sheet, future_sheet = eps_neighborhood_body(
            split, eps, xs=xs, ys=ys, mask=mask, curve=curve
        )
    except (EpsBudgetExceeded, EpsTooLarge) as exc:
        raise PipelineFailed("eps_neighborhood_body", str(exc)) from exc

    try:
        r_sample = min(r_max + 0.04, 0.985)
        poly_minus = polyhedral_approx(past_sheet, delta, r_sample, "upper")
        poly_plus = polyhedral_approx(future_sheet, delta, r_sample, "lower")
    except PipelineFailed:
        raise
    except Exception as exc:
        raise PipelineFailed("polyhedral_approx", str(exc)) from exc

    try:
        profile = smooth_profile(eta, profile_kind)
        smooth_minus = smooth_sheet(poly_minus.sheet_mesh(), profile, "upper")
        smooth_plus = smooth_sheet(poly_plus.sheet_mesh(), profile, "lower")
    except Exception as exc:
        raise PipelineFailed("smoothing", str(exc)) from exc

    try:
        # Outward offsets: past barrier toward the past (negative flow
        # time along the future normal), future barrier toward the future.
        param_minus = normal_offset(chart_graph(lambda x, y: smooth_minus(x, y)), -eps2)
        param_plus = normal_offset(chart_graph(lambda x, y: smooth_plus(x, y)), +eps2)
        xx, yy = np.meshgrid(xs, ys, indexing="ij")
        z_minus = np.full(xx.shape, np.nan)
        z_plus = np.full(xx.shape, np.nan)
        z_minus[mask] = graph_from_parametric(param_minus, xx[mask], yy[mask])
        z_plus[mask] = graph_from_parametric(param_plus, xx[mask], yy[mask])
        sigma_minus = HeightField(xs, ys, z_minus, mask & np.isfinite(z_minus), side="upper")
        sigma_plus = HeightField(xs, ys, z_plus, mask & np.isfinite(z_plus), side="lower")
    except Exception as exc:
        raise PipelineFailed("offset", str(exc)) from exc

    try:
        certificate, h_minus, h_plus = _certify(
            curve, param_minus, param_plus, sigma_minus, sigma_plus, xs, ys, mask, eps2
        )
    except Exception as exc:
        raise PipelineFailed("certificates", str(exc)) from exc

    return BarrierResult(
        sigma_minus=sigma_minus,
        sigma_plus=sigma_plus,
        certificate=certificate,
        split=split,
        h_minus=h_minus,
        h_plus=h_plus,
    )


def _certify(curve, param_minus, param_plus, sigma_minus, sigma_plus, xs, ys, mask, eps2):
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    # certify strictly inside the working disc (stencils stay valid)
    r_cert = 0.92 * np.sqrt(np.max((xx**2 + yy**2)[mask]))
    cert_mask = xx**2 + yy**2 <= r_cert**2

    h_minus = np.full(xx.shape, np.nan)
    h_plus = np.full(xx.shape, np.nan)
    h_minus[cert_mask] = mean_curvature(param_minus, xx[cert_mask], yy[cert_mask])
    h_plus[cert_mask] = mean_curvature(param_plus, xx[cert_mask], yy[cert_mask])

    # spacelike margin: smallest induced-metric eigenvalue over both sheets
    margins = []
    for param in (param_minus, param_plus):
        jet = _first_jet(param, xx[cert_mask], yy[cert_mask])
        g11 = b_eval(jet["fu"], jet["fu"])
        g22 = b_eval(jet["fv"], jet["fv"])
        g12 = b_eval(jet["fu"], jet["fv"])
        half = 0.5 * (g11 + g22)
        gap = np.sqrt(np.maximum(half**2 - (g11 * g22 - g12**2), 0.0))
        margins.append(np.min(half - gap))
    spacelike_margin = float(min(margins))

    ordering_margin = float(np.min(sigma_minus.values[cert_mask] - sigma_plus.values[cert_mask]))

    in_black = _field_in_black_domain_masked(sigma_minus, curve, cert_mask) and _field_in_black_domain_masked(
        sigma_plus, curve, cert_mask
    )

    base_r = 1.0 / np.tan(eps2)
    cert_minus = _certify_radius_ladder(_restrict(sigma_minus, cert_mask), base_r)
    cert_plus = _certify_radius_ladder(_restrict(sigma_plus, cert_mask), base_r)
    curvature_r = float("nan")
    if isinstance(cert_minus, CurvatureCert) and isinstance(cert_plus, CurvatureCert):
        curvature_r = max(cert_minus.radius, cert_plus.radius)

    certificate = BarrierCertificate(
        h_minus_max=float(np.nanmax(h_minus)),
        h_plus_min=float(np.nanmin(h_plus)),
        spacelike_margin=spacelike_margin,
        curvature_R=curvature_r,
        ordering_margin=ordering_margin,
        in_black_domain=in_black,
        support_planes_spacelike=spacelike_margin > 0.0,
    )
    return certificate, h_minus, h_plus


def _restrict(field: HeightField, cert_mask) -> HeightField:
    return HeightField(field.xs, field.ys, field.values, field.mask & cert_mask, field.side)


def _field_in_black_domain_masked(field: HeightField, curve: BoundaryCurve, cert_mask) -> bool:
    xx, yy = field.meshgrid()
    m = field.mask & cert_mask & np.isfinite(field.values)
    pts = chart_lift_interior(xx[m], yy[m], field.values[m])
    samples = curve.sample_vectors()
    samples = samples / np.linalg.norm(samples, axis=-1, keepdims=True)
    vals = pts @ (samples * np.array([-1.0, -1.0, 1.0, 1.0])).T
    return bool(np.all(vals < 0.0))


def _first_jet(param, x, y, h: float = 1e-3):
    return {
        "fu": (param(x + h, y) - param(x - h, y)) / (2 * h),
        "fv": (param(x, y + h) - param(x, y - h)) / (2 * h),
    }


def flat_fast_path(nx: int = 96, ny: int = 96, r_max: float = 0.9):
    """Totally geodesic disc z = 0: the maximal surface of a flat curve.

    Returns the height field and its mean curvature values (identically
    zero up to stencil error).
    """
    xs, ys, mask = make_grid(nx, ny, r_max)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    z = np.where(mask, 0.0, np.nan)
    field = HeightField(xs, ys, z, mask, side="upper")
    flat = chart_graph(lambda x, y: np.zeros_like(np.asarray(x, dtype=float)))
    r_cert = 0.95 * r_max
    cmask = xx**2 + yy**2 <= r_cert**2
    h = np.full(xx.shape, np.nan)
    h[cmask] = mean_curvature(flat, xx[cmask], yy[cmask])
    return field, h
