"""Achronal and spacelike surfaces as graphs over the hemisphere.

In the cylinder model a properly embedded spacelike surface is the graph
of a contracting map f from the closed hemisphere to the time circle;
1-Lipschitz graphs are non-timelike.  Distances on the hemisphere are
great-circle arcs of the round metric, not Euclidean disc distances.

Angle values are stored as continuous lifts: edge jumps must stay below
pi, and closing around the boundary circle must return to the same lift
(zero monodromy in time while winding once in angle).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import config, _kernels
from .core import ProjPoint
from .causal import CylinderPoint
from .errors import NotSpacelike, RescaleImpossible


def hemi_point(rho, phi) -> np.ndarray:
    """Hemisphere point at polar distance rho from the center, azimuth phi."""
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.sin(rho) * np.cos(phi), np.sin(rho) * np.sin(phi), np.cos(rho)], axis=-1)


def hemi_distance(u, v):
    """Great-circle distance on the sphere (batched)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.arccos(np.clip(np.sum(u * v, axis=-1), -1.0, 1.0))


@dataclass(frozen=True)
class PolarGrid:
    """Polar node layout on the closed hemisphere.

    Ring i sits at polar distance rho_i = (pi/2) i / (n_r - 1); ring 0
    degenerates to the center (duplicated across angles) and the last ring
    is the boundary circle.
    """

    n_r: int
    n_phi: int

    def __post_init__(self):
        if self.n_r < 2 or self.n_phi < 3:
            raise ValueError("need n_r >= 2 and n_phi >= 3")

    @property
    def rhos(self) -> np.ndarray:
        return (np.pi / 2.0) * np.arange(self.n_r) / (self.n_r - 1)

    @property
    def phis(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    def nodes(self) -> np.ndarray:
        """(n_r, n_phi, 3) hemisphere points."""
        rr, pp = np.meshgrid(self.rhos, self.phis, indexing="ij")
        return hemi_point(rr, pp)

    def interior_mask(self) -> np.ndarray:
        m = np.ones((self.n_r, self.n_phi), dtype=bool)
        m[-1, :] = False
        return m

    def edges(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        """Radial and angular nearest-neighbor edges (the degenerate center
        ring contributes only radial spokes)."""
        out = []
        for i in range(self.n_r - 1):
            for j in range(self.n_phi):
                out.append(((i, j), (i + 1, j)))
        for i in range(1, self.n_r):
            for j in range(self.n_phi):
                out.append(((i, j), (i, (j + 1) % self.n_phi)))
        return out


@dataclass(frozen=True)
class GraphSurface:
    """Angle-valued height function on a polar grid (continuous lift)."""

    grid: PolarGrid
    f: np.ndarray

    def __init__(self, grid: PolarGrid, f):
        f = np.array(f, dtype=float)
        if f.shape != (grid.n_r, grid.n_phi):
            raise ValueError(f"f shape {f.shape} does not match grid {(grid.n_r, grid.n_phi)}")
        # Collapse the duplicated center ring to a single value.
        f[0, :] = np.mean(f[0, :])
        for (i1, j1), (i2, j2) in grid.edges():
            if abs(f[i1, j1] - f[i2, j2]) >= np.pi:
                raise ValueError("angle lift jumps by >= pi along a grid edge")
        f.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "f", f)

    def evaluate(self, u) -> np.ndarray:
        """Bilinear interpolation of the lift at hemisphere points u."""
        u = np.asarray(u, dtype=float)
        rho = np.arccos(np.clip(u[..., 2], -1.0, 1.0))
        phi = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2.0 * np.pi)
        dr = (np.pi / 2.0) / (self.grid.n_r - 1)
        dp = 2.0 * np.pi / self.grid.n_phi
        ri = np.clip(rho / dr, 0, self.grid.n_r - 1 - 1e-12)
        pj = phi / dp
        i0 = np.floor(ri).astype(int)
        j0 = np.floor(pj).astype(int) % self.grid.n_phi
        wr = ri - i0
        wp = pj - np.floor(pj)
        i1 = np.minimum(i0 + 1, self.grid.n_r - 1)
        j1 = (j0 + 1) % self.grid.n_phi
        f = self.f
        return (
            f[i0, j0] * (1 - wr) * (1 - wp)
            + f[i1, j0] * wr * (1 - wp)
            + f[i0, j1] * (1 - wr) * wp
            + f[i1, j1] * wr * wp
        )

    def cylinder_points(self) -> list[CylinderPoint]:
        nodes = self.grid.nodes()
        return [
            CylinderPoint(self.f[i, j], nodes[i, j])
            for i in range(self.grid.n_r)
            for j in range(self.grid.n_phi)
        ]


def lipschitz_constant(surface: GraphSurface) -> float:
    """Max over grid edges of |angle difference| / hemisphere distance."""
    nodes = surface.grid.nodes()
    best = 0.0
    for (i1, j1), (i2, j2) in surface.grid.edges():
        d = float(hemi_distance(nodes[i1, j1], nodes[i2, j2]))
        if d <= 1e-12:
            continue
        best = max(best, abs(surface.f[i1, j1] - surface.f[i2, j2]) / d)
    return best


def is_spacelike(surface: GraphSurface, margin: float = config.SPACELIKE_MARGIN) -> bool:
    return bool(lipschitz_constant(surface) < 1.0 - margin)


def is_nontimelike(surface: GraphSurface, tol: float = config.NONTIMELIKE_TOL) -> bool:
    return bool(lipschitz_constant(surface) <= 1.0 + tol)


@dataclass(frozen=True)
class BoundaryCurve:
    """Angle graph over the boundary circle, with quadric representatives.

    The function value at azimuth phi is a0 + sum_k (a_k cos k phi +
    b_k sin k phi); representatives [cos f : sin f : cos phi : sin phi]
    lie on the null quadric by construction.
    """

    a: dict[int, float]
    b: dict[int, float]
    a0: float = 0.0
    n_samples: int = 64

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        out = np.full_like(phi, self.a0)
        for k, c in self.a.items():
            out = out + c * np.cos(k * phi)
        for k, c in self.b.items():
            out = out + c * np.sin(k * phi)
        return out

    def derivative(self, phi):
        phi = np.asarray(phi, dtype=float)
        out = np.zeros_like(phi)
        for k, c in self.a.items():
            out = out - c * k * np.sin(k * phi)
        for k, c in self.b.items():
            out = out + c * k * np.cos(k * phi)
        return out

    def lipschitz_bound(self, n_check: int = 4096) -> float:
        phi = np.linspace(0.0, 2.0 * np.pi, n_check, endpoint=False)
        return float(np.max(np.abs(self.derivative(phi))))

    @property
    def phis(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_samples) / self.n_samples

    @property
    def sample_values(self) -> np.ndarray:
        return self(self.phis)

    def sample_vectors(self) -> np.ndarray:
        """(n, 4) null-quadric representatives of the samples."""
        phi = self.phis
        f = self(phi)
        return np.stack([np.cos(f), np.sin(f), np.cos(phi), np.sin(phi)], axis=-1)

    def sample_points(self) -> list[ProjPoint]:
        return [ProjPoint(v) for v in self.sample_vectors()]

    @property
    def is_flat(self) -> bool:
        return self.a0 == 0.0 and not any(self.a.values()) and not any(self.b.values())


def synth_boundary_curve(
    a: dict[int, float] | None = None,
    b: dict[int, float] | None = None,
    a0: float = 0.0,
    lambda_max: float = 0.8,
    n_samples: int = 64,
) -> BoundaryCurve:
    """Trig-polynomial boundary curve rescaled to Lipschitz <= lambda_max.

    Only the oscillating part is rescaled (the constant a0 does not affect
    the Lipschitz constant).  Raises RescaleImpossible when a nonzero
    oscillation is requested with lambda_max = 0.
    """
    a = {int(k): float(v) for k, v in (a or {}).items() if v != 0.0}
    b = {int(k): float(v) for k, v in (b or {}).items() if v != 0.0}
    curve = BoundaryCurve(a=a, b=b, a0=a0, n_samples=n_samples)
    lip = curve.lipschitz_bound()
    if lip > lambda_max:
        if lambda_max <= 0.0:
            raise RescaleImpossible("nonzero oscillation with lambda_max = 0")
        scale = lambda_max / lip
        a = {k: v * scale for k, v in a.items()}
        b = {k: v * scale for k, v in b.items()}
        curve = BoundaryCurve(a=a, b=b, a0=a0, n_samples=n_samples)
    return curve


def graph_surface_from_curve(curve: BoundaryCurve, grid: PolarGrid) -> GraphSurface:
    """Spanning spacelike graph with the curve as boundary values:
    f(rho, phi) = a0 + sin(rho) (f_boundary(phi) - a0).

    The gradient splits as (cos(rho) osc, osc') in the orthonormal frame,
    so the surface is spacelike whenever max|osc|^2 + max|osc'|^2 < 1;
    verified after construction.
    """
    rr, pp = np.meshgrid(grid.rhos, grid.phis, indexing="ij")
    osc = curve(pp) - curve.a0
    f = curve.a0 + np.sin(rr) * osc
    surface = GraphSurface(grid, f)
    if not is_nontimelike(surface):
        raise NotSpacelike("spanning surface of the curve is not non-timelike")
    return surface


@dataclass(frozen=True)
class AchronalReport:
    checked_pairs: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_achronal(surface: GraphSurface, tol: float = 1e-12) -> AchronalReport:
    """Pairwise scan of |f(u) - f(v)| against hemisphere distance.

    Interior pairs must satisfy the strict inequality; pairs touching the
    boundary ring only the non-strict one.
    """
    nodes = surface.grid.nodes().reshape(-1, 3)
    f = surface.f.reshape(-1)
    interior = surface.grid.interior_mask().reshape(-1)
    pairs = _kernels.achronal_violations(nodes, f, interior, tol)
    n = len(f)
    return AchronalReport(checked_pairs=n * (n - 1) // 2, violations=pairs)


@dataclass(frozen=True)
class LightRay:
    """Inextendable lightlike geodesic in the cylinder model.

    The footpoint track is the half great circle entering the hemisphere at
    boundary azimuth phi0 with elevation angle psi in (0, pi); the time
    coordinate moves with unit slope: t(s) = t0 + slope * s, s in [0, pi].
    """

    phi0: float
    psi: float
    t0: float
    slope: int = 1

    def __post_init__(self):
        if self.slope not in (-1, 1):
            raise ValueError("slope must be +1 or -1")
        if not (0.0 < self.psi < np.pi):
            raise ValueError("psi must lie in (0, pi)")

    def track(self, s):
        s = np.asarray(s, dtype=float)
        a = np.array([np.cos(self.phi0), np.sin(self.phi0), 0.0])
        b = np.array([-np.sin(self.phi0), np.cos(self.phi0), 0.0])
        w = np.cos(self.psi) * b + np.sin(self.psi) * np.array([0.0, 0.0, 1.0])
        return np.cos(s)[..., None] * a + np.sin(s)[..., None] * w

    def time(self, s):
        return self.t0 + self.slope * np.asarray(s, dtype=float)

    @staticmethod
    def through(u, t: float, direction_psi: float, slope: int = 1) -> "LightRay":
        """The ray whose track passes through the hemisphere point u at
        time t, entering at the boundary along the great circle of
        elevation direction_psi."""
        ray0 = LightRay(phi0=0.0, psi=direction_psi, t0=0.0, slope=slope)
        # Solve for the arc position of u on a candidate track by brute
        # alignment: rotate phi0 so that the track hits u.
        rho = float(np.arccos(np.clip(u[2], -1.0, 1.0)))
        s_u = float(np.arcsin(np.clip(np.cos(rho) / np.sin(direction_psi), -1.0, 1.0)))
        track_point = ray0.track(s_u)
        phi_track = np.arctan2(track_point[1], track_point[0])
        phi_u = np.arctan2(u[1], u[0])
        ray = LightRay(phi0=float(phi_u - phi_track), psi=direction_psi, t0=0.0, slope=slope)
        return LightRay(ray.phi0, ray.psi, t - slope * s_u, slope)


def lightlike_once(surface: GraphSurface, ray: LightRay, n_samples: int = 2048) -> int:
    """Number of transversal crossings of the ray with the graph surface.

    Counts strict sign changes of t(s) - f(track(s)) over a dense arc
    sampling; rays starting exactly on the boundary curve contribute no
    crossing at their endpoints.
    """
    s = np.linspace(0.0, np.pi, n_samples)
    g = ray.time(s) - surface.evaluate(ray.track(s))
    signs = np.sign(g)
    nz = signs != 0
    s_nz = signs[nz]
    return int(np.sum(s_nz[1:] * s_nz[:-1] < 0))


def surface_to_json(surface: GraphSurface) -> str:
    payload = {
        "grid": {"n_r": surface.grid.n_r, "n_phi": surface.grid.n_phi},
        "f": [float(v) for v in surface.f.reshape(-1)],
    }
    return json.dumps(payload, sort_keys=True)


def surface_from_json(text: str) -> GraphSurface:
    payload = json.loads(text)
    grid = PolarGrid(int(payload["grid"]["n_r"]), int(payload["grid"]["n_phi"]))
    f = np.array(payload["f"], dtype=float).reshape(grid.n_r, grid.n_phi)
    return GraphSurface(grid, f)


def random_spacelike_surface(rng: np.random.Generator, n_r: int = 17, n_phi: int = 32) -> tuple[GraphSurface, BoundaryCurve]:
    """Random member of the trig family together with its boundary curve."""
    n_modes = int(rng.integers(1, 4))
    a = {int(k): float(rng.normal(0, 0.15)) for k in rng.choice(np.arange(1, 6), n_modes, replace=False)}
    b = {int(k): float(rng.normal(0, 0.15)) for k in rng.choice(np.arange(1, 6), n_modes, replace=False)}
    lam = float(rng.uniform(0.3, 0.8))
    curve = synth_boundary_curve(a=a, b=b, a0=float(rng.uniform(-0.3, 0.3)), lambda_max=lam, n_samples=n_phi)
    grid = PolarGrid(n_r, n_phi)
    return graph_surface_from_curve(curve, grid), curve
