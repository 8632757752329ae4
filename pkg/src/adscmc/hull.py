"""Convexity in projective charts: hulls of boundary-curve samples, the
black domain of a curve, and the past/future boundary sheets of the hull.

Everything happens in the chart of the base point [1:0:0:0], where convex
subsets of the space are ordinary convex subsets of R^3.  The hull is an
incremental insertion algorithm with double-precision orientation
predicates and a declared epsilon on normalized coordinates; the
brute-force non-splitting-plane construction is kept alongside as an
independent oracle.

Chart time convention: the future direction at the chart center is -z, so
the upper (larger z) sheet of a hull is the past boundary and the lower
sheet the future boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import config, _kernels
from .core import ProjPoint, b_eval
from .causal import chart_phi_p0
from .errors import DegenerateCloud, DeltaTooCoarse, FlatCurve
from .surfaces import BoundaryCurve


@dataclass(frozen=True)
class PolySurfaceMesh:
    """Triangle mesh with per-face outward planes (n . x <= d inside)."""

    vertices: np.ndarray  # (V, 3)
    faces: np.ndarray  # (F, 3) indices into vertices
    normals: np.ndarray  # (F, 3) unit outward normals
    offsets: np.ndarray  # (F,)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def plane_heights(self, x, y, side: str) -> np.ndarray:
        """Envelope of the face planes along vertical lines.

        side='upper' gives the min over planes with outward normal nz > 0
        (the past boundary sheet of a convex body), side='lower' the max
        over planes with nz < 0.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if side == "upper":
            mask = self.normals[:, 2] > 1e-12
        elif side == "lower":
            mask = self.normals[:, 2] < -1e-12
        else:
            raise ValueError("side must be 'upper' or 'lower'")
        n = self.normals[mask]
        d = self.offsets[mask]
        if len(n) == 0:
            raise DeltaTooCoarse(f"no faces on the {side} side")
        heights = (d[None, ...] - np.multiply.outer(x, n[:, 0]) - np.multiply.outer(y, n[:, 1])) / n[None, :, 2]
        return heights.min(axis=-1) if side == "upper" else heights.max(axis=-1)

    def max_violation(self, points) -> float:
        """Largest signed distance of any point outside any face plane."""
        points = np.asarray(points, dtype=float)
        return float(np.max(points @ self.normals.T - self.offsets[None, :]))

    def submesh(self, face_mask) -> "PolySurfaceMesh":
        return PolySurfaceMesh(
            vertices=self.vertices,
            faces=self.faces[face_mask],
            normals=self.normals[face_mask],
            offsets=self.offsets[face_mask],
        )

    def to_obj(self) -> str:
        lines = [f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}" for v in self.vertices]
        lines += [f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}" for f in self.faces]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "vertices": [[float(c) for c in v] for v in self.vertices],
                "faces": [[int(i) for i in f] for f in self.faces],
                "planes": [
                    {"normal": [float(c) for c in n], "offset": float(d)}
                    for n, d in zip(self.normals, self.offsets)
                ],
            },
            sort_keys=True,
        )


def _face_plane(p0, p1, p2):
    n = np.cross(p1 - p0, p2 - p0)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        return None
    n = n / norm
    return n, float(n @ p0)


def convex_hull(points, eps: float = config.TOL_ORIENT) -> PolySurfaceMesh:
    """Incremental-insertion convex hull of a 3D point cloud.

    Orientation tests use the given epsilon scaled by the cloud extent;
    coplanar clouds raise DegenerateCloud.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("expected an (N, 3) point array")
    n_pts = len(pts)
    if n_pts < 4:
        raise DegenerateCloud("need at least 4 points")
    scale = float(np.max(np.ptp(pts, axis=0)))
    if scale == 0.0:
        raise DegenerateCloud("all points coincide")
    tol = eps * scale

    # Initial simplex: lexicographic min, farthest point, farthest from the
    # line, farthest from the plane.
    i0 = int(np.lexsort(pts.T[::-1])[0])
    d0 = np.linalg.norm(pts - pts[i0], axis=1)
    i1 = int(np.argmax(d0))
    if d0[i1] <= tol:
        raise DegenerateCloud("cloud has zero diameter")
    axis = (pts[i1] - pts[i0]) / d0[i1]
    off = pts - pts[i0]
    d_line = np.linalg.norm(off - np.outer(off @ axis, axis), axis=1)
    i2 = int(np.argmax(d_line))
    if d_line[i2] <= tol:
        raise DegenerateCloud("cloud is collinear")
    plane = _face_plane(pts[i0], pts[i1], pts[i2])
    d_plane = np.abs(pts @ plane[0] - plane[1])
    i3 = int(np.argmax(d_plane))
    if d_plane[i3] <= tol:
        raise DegenerateCloud("cloud is coplanar")

    centroid = np.mean(pts[[i0, i1, i2, i3]], axis=0)
    cap = 8 * n_pts + 16
    faces = np.empty((cap, 3), dtype=int)
    normals = np.empty((cap, 3))
    offsets = np.empty(cap)
    alive = np.zeros(cap, dtype=bool)
    n_slots = 0

    def add_face(a, b, c):
        nonlocal n_slots
        pl = _face_plane(pts[a], pts[b], pts[c])
        if pl is None:
            return
        n, d = pl
        if n @ centroid > d:  # flip to point away from the interior
            b, c = c, b
            n, d = -n, -d
        faces[n_slots] = (a, b, c)
        normals[n_slots] = n
        offsets[n_slots] = d
        alive[n_slots] = True
        n_slots += 1

    add_face(i0, i1, i2)
    add_face(i0, i1, i3)
    add_face(i0, i2, i3)
    add_face(i1, i2, i3)

    order = [i for i in range(n_pts) if i not in (i0, i1, i2, i3)]
    for p_idx in order:
        p = pts[p_idx]
        sd = normals[:n_slots] @ p - offsets[:n_slots]
        visible = np.nonzero(alive[:n_slots] & (sd > tol))[0]
        if len(visible) == 0:
            continue
        edge_count: dict[tuple[int, int], int] = {}
        for f in visible:
            a, b, c = faces[f]
            for e in ((a, b), (b, c), (c, a)):
                edge_count[e] = edge_count.get(e, 0) + 1
        horizon = [e for e in edge_count if (e[1], e[0]) not in edge_count]
        alive[visible] = False
        if n_slots + len(horizon) > cap:
            live = np.nonzero(alive[:n_slots])[0]
            k = len(live)
            faces[:k] = faces[live]
            normals[:k] = normals[live]
            offsets[:k] = offsets[live]
            alive[:] = False
            alive[:k] = True
            n_slots = k
        for a, b in horizon:
            add_face(a, b, p_idx)

    live = np.nonzero(alive[:n_slots])[0]
    mesh = PolySurfaceMesh(
        vertices=pts,
        faces=faces[live].copy(),
        normals=normals[live].copy(),
        offsets=offsets[live].copy(),
    )
    violation = mesh.max_violation(pts)
    if violation > 10 * tol:
        raise DegenerateCloud(f"hull construction failed: outside violation {violation:.3g}")
    return mesh


def brute_force_hull_triangles(points, eps: float = config.TOL_ORIENT) -> list[tuple[int, int, int]]:
    """All triangles whose supporting plane does not split the cloud."""
    pts = np.asarray(points, dtype=float)
    scale = float(np.max(np.ptp(pts, axis=0)))
    return _kernels.nonsplitting_triangles(pts, eps * scale)


def canonical_facets(points, triangles, tol: float = 1e-8) -> set[frozenset]:
    """Facets up to coplanar merging: each triangle maps to the set of all
    cloud points lying on its supporting plane."""
    pts = np.asarray(points, dtype=float)
    scale = float(np.max(np.ptp(pts, axis=0)))
    facets = set()
    for i, j, k in triangles:
        pl = _face_plane(pts[i], pts[j], pts[k])
        if pl is None:
            continue
        n, d = pl
        onplane = np.nonzero(np.abs(pts @ n - d) <= tol * scale)[0]
        facets.add(frozenset(int(m) for m in onplane))
    return facets


def hull_vertices(mesh: PolySurfaceMesh) -> np.ndarray:
    return np.unique(mesh.faces.reshape(-1))


# ---------------------------------------------------------------------------
# Hulls of boundary curves.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HullSplit:
    """The two boundary sheets of the hull of a spacelike boundary curve.

    upper is the sheet with outward normals pointing to larger chart z;
    since the future direction at the chart center is -z, upper is the
    past (convex) sheet and lower the future (concave) sheet.
    """

    lower: PolySurfaceMesh
    upper: PolySurfaceMesh

    @property
    def past_mesh(self) -> PolySurfaceMesh:
        return self.upper

    @property
    def future_mesh(self) -> PolySurfaceMesh:
        return self.lower


def curve_chart_points(curve: BoundaryCurve) -> np.ndarray:
    """Chart coordinates of the curve samples (on the unit hyperboloid)."""
    out = []
    for p in curve.sample_points():
        c = chart_phi_p0(p)
        out.append([c.x, c.y, c.z])
    return np.array(out)


def curve_is_flat(curve: BoundaryCurve, tol: float = 1e-9) -> bool:
    """True when the curve samples are coplanar in the chart."""
    pts = curve_chart_points(curve)
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    return bool(sv[-1] <= tol * max(sv[0], 1.0))


def hull_of_boundary_curve(curve: BoundaryCurve, eps: float = config.TOL_ORIENT) -> HullSplit:
    """Split hull of the curve samples into its two spacelike sheets.

    Faces are classified by the sign of the z-component of the outward
    normal; near-vertical faces (|nz| below tolerance) would violate
    spacelikeness and are rejected.  Flat curves raise FlatCurve (the
    totally geodesic fast path applies instead).
    """
    if curve_is_flat(curve):
        raise FlatCurve("curve is contained in a totally geodesic plane")
    pts = curve_chart_points(curve)
    try:
        mesh = convex_hull(pts, eps=eps)
    except DegenerateCloud as exc:
        raise FlatCurve(str(exc)) from exc
    nz = mesh.normals[:, 2]
    vertical = np.abs(nz) <= 1e-9
    if np.any(vertical):
        raise DeltaTooCoarse(f"{int(np.sum(vertical))} near-vertical hull faces")
    upper = mesh.submesh(nz > 0)
    lower = mesh.submesh(nz < 0)
    if upper.n_faces == 0 or lower.n_faces == 0:
        raise DeltaTooCoarse("hull did not produce two sheets")
    return HullSplit(lower=lower, upper=upper)


def spacelike_support_planes(mesh: PolySurfaceMesh) -> tuple[bool, list[int]]:
    """Check that every face plane is a spacelike totally geodesic plane.

    The chart plane alpha x + beta y + gamma z = delta is the trace of the
    linear hyperplane B_Q(v, .) = 0 with v = (delta, -gamma, alpha, beta);
    the plane is spacelike iff Q(v) < 0, i.e. alpha^2 + beta^2 <
    gamma^2 + delta^2.
    """
    offenders = []
    for i, (n, d) in enumerate(zip(mesh.normals, mesh.offsets)):
        alpha, beta, gamma = n
        q_dual = -d**2 - gamma**2 + alpha**2 + beta**2
        if q_dual >= -1e-12:
            offenders.append(i)
    return not offenders, offenders


def plane_dual_vector(normal, offset) -> np.ndarray:
    """Dual 4-vector of a chart plane n . (x, y, z) = d."""
    alpha, beta, gamma = normal
    return np.array([offset, -gamma, alpha, beta])


# ---------------------------------------------------------------------------
# Black domain and the ray-casting development oracle.
# ---------------------------------------------------------------------------


def black_domain_test(r: ProjPoint, curve: BoundaryCurve, tol: float = config.TOL_CAUSAL) -> bool:
    """True iff B_Q(r, q) < -tol for every curve sample q."""
    samples = curve.sample_vectors()
    samples = samples / np.linalg.norm(samples, axis=-1, keepdims=True)
    vals = b_eval(r.v[None, :], samples)
    return bool(np.all(vals < -tol))


def black_domain_test_cylinder(t_r, u_r, curve: BoundaryCurve, tol: float = config.TOL_CAUSAL) -> bool:
    """Same predicate through the product model: the point is spacelike
    separated from every curve sample iff |dt| < hemisphere distance."""
    phi = curve.phis
    f = curve.sample_values
    uq = np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=-1)
    dist = np.arccos(np.clip(uq @ np.asarray(u_r), -1.0, 1.0))
    dt = np.abs((t_r - f + np.pi) % (2 * np.pi) - np.pi)
    return bool(np.all(dt < dist - tol))


def _hemi_basis(u):
    """Orthonormal tangent basis of the sphere at u."""
    u = np.asarray(u, dtype=float)
    seed = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    b1 = seed - (seed @ u) * u
    b1 = b1 / np.linalg.norm(b1)
    b2 = np.cross(u, b1)
    return b1, b2


def ray_casting_development_test(t_r: float, u_r, surface_eval, curve: BoundaryCurve, n_dirs: int = 64) -> bool:
    """Cauchy-development membership by casting lightlike rays.

    A point off the surface is in the development iff every inextendable
    lightlike ray leaving it toward the surface side crosses the surface
    before escaping to the boundary.  Rays are discretized over n_dirs
    tangent directions; each ray is decided exactly at its boundary
    endpoint (the time graph along a ray moves with unit slope while the
    surface graph is contracting, so the crossing test reduces to an
    endpoint comparison).
    """
    u_r = np.asarray(u_r, dtype=float)
    f_here = float(surface_eval(u_r))
    diff = t_r - f_here
    if abs(diff) <= 1e-12:
        return True
    b1, b2 = _hemi_basis(u_r)
    psis = 2.0 * np.pi * np.arange(n_dirs) / n_dirs
    w = np.outer(np.cos(psis), b1) + np.outer(np.sin(psis), b2)  # (n, 3)
    # Arc length to the boundary along each great circle: u5(s) =
    # u_r5 cos s + w5 sin s hits zero at s = atan2(u_r5, -w5).
    s_exit = np.arctan2(u_r[2], -w[:, 2])
    exit_pts = np.cos(s_exit)[:, None] * u_r[None, :] + np.sin(s_exit)[:, None] * w
    exit_phi = np.arctan2(exit_pts[:, 1], exit_pts[:, 0])
    f_exit = curve(exit_phi)
    if diff < 0:
        # Past of the surface: future rays must cross before exiting.
        return bool(np.all(t_r + s_exit >= f_exit))
    return bool(np.all(t_r - s_exit <= f_exit))


@dataclass(frozen=True)
class DevelopmentComparison:
    n_samples: int
    n_disagree: int
    disagreements: list

    @property
    def rate(self) -> float:
        return self.n_disagree / max(self.n_samples, 1)


def cauchy_dev_equals_black_domain(
    curve: BoundaryCurve,
    surface,
    sample_points,
    n_dirs: int = 64,
    tol: float = config.TOL_CAUSAL,
) -> DevelopmentComparison:
    """Compare the black-domain predicate against the ray-casting oracle on
    cylinder sample points (t, u).

    surface is the spacelike graph spanning the curve, either a
    GraphSurface or a callable on hemisphere points.
    """
    surface_eval = surface.evaluate if hasattr(surface, "evaluate") else surface
    bad = []
    for t_r, u_r in sample_points:
        in_black = black_domain_test_cylinder(t_r, u_r, curve, tol=tol)
        in_dev = ray_casting_development_test(t_r, u_r, surface_eval, curve, n_dirs=n_dirs)
        if in_black != in_dev:
            bad.append((float(t_r), np.asarray(u_r).tolist(), in_black, in_dev))
    return DevelopmentComparison(n_samples=len(sample_points), n_disagree=len(bad), disagreements=bad)
