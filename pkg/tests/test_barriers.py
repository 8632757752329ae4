import numpy as np
import pytest

from adscmc import barriers as bar
from adscmc import meancurv
from adscmc.causal import chart_lift_interior, lorentzian_curve_length
from adscmc.core import b_eval, q_eval
from adscmc.errors import EpsTooLarge, NotConvexInput, NotSpacelikeHere
from adscmc.hull import hull_of_boundary_curve, spacelike_support_planes
from adscmc.surfaces import synth_boundary_curve
from adscmc.torus import embed_orbit_vec, kappa


HEMI = lambda x, y: np.sqrt(np.maximum(1.0 - np.asarray(x) ** 2 - np.asarray(y) ** 2, 0.0))


def disc_field(fn, n=81, r=0.8, side="upper") -> bar.HeightField:
    xs = np.linspace(-r, r, n)
    xx, yy = np.meshgrid(xs, xs, indexing="ij")
    mask = xx**2 + yy**2 <= r**2
    z = np.full(xx.shape, np.nan)
    z[mask] = fn(xx[mask], yy[mask])
    return bar.HeightField(xs, xs, z, mask, side=side)


class TestEpsHalfspace:
    def test_pi_quarter_gives_unit_hemisphere(self, rng):
        region = bar.eps_halfspace(bar.plane_z0(), np.pi / 4, "past")
        pts = rng.uniform(-0.7, 0.7, (100, 2))
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        h = region.boundary_height(pts[:, 0], pts[:, 1])
        np.testing.assert_allclose(h, np.sqrt(1 - r2), atol=1e-10)

    def test_small_eps_boundary_approaches_plane(self):
        x = np.linspace(-0.5, 0.5, 11)
        for eps in (1e-3, 1e-5):
            region = bar.eps_halfspace(bar.plane_z0(), eps, "past")
            h = region.boundary_height(x, np.zeros_like(x))
            assert np.max(np.abs(h)) <= 2 * eps

    def test_general_eps_formula(self, rng):
        eps = 0.15
        pts = rng.uniform(-0.6, 0.6, (50, 2))
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        past = bar.eps_halfspace(bar.plane_z0(), eps, "past")
        future = bar.eps_halfspace(bar.plane_z0(), eps, "future")
        np.testing.assert_allclose(past.boundary_height(pts[:, 0], pts[:, 1]), np.tan(eps) * np.sqrt(1 - r2), atol=1e-12)
        np.testing.assert_allclose(future.boundary_height(pts[:, 0], pts[:, 1]), -np.tan(eps) * np.sqrt(1 - r2), atol=1e-12)

    def test_eps_too_large(self):
        with pytest.raises(EpsTooLarge):
            bar.eps_halfspace(bar.plane_z0(), np.pi / 2, "past")

    def test_normal_distance_is_eps_by_quadrature(self, rng):
        # lift each sampled boundary point, drop the normal geodesic to the
        # plane, and measure its Lorentzian length by chord quadrature
        eps = np.pi / 4
        region = bar.eps_halfspace(bar.plane_z0(), eps, "past")
        for _ in range(100):
            x, y = rng.uniform(-0.6, 0.6, 2)
            z = float(region.boundary_height(np.array(x), np.array(y)))
            q = chart_lift_interior(np.array(x), np.array(y), np.array(z))
            # foot of the normal geodesic on the plane x2 = 0
            foot = q.copy()
            foot[1] = 0.0
            foot = foot / np.sqrt(-q_eval(foot))
            n = np.array([0.0, 1.0, 0.0, 0.0])
            n = n + b_eval(n, foot) * foot
            n = n / np.sqrt(-q_eval(n))
            s_grid = np.linspace(0, eps, 1501)  # 1500 intervals: [::3] keeps the endpoint
            seg = np.cos(s_grid)[:, None] * foot + np.sin(s_grid)[:, None] * (np.sign(b_eval(n, q)) * -n)
            # orient the normal so the geodesic ends at the boundary point
            if np.linalg.norm(seg[-1] - q) > 1e-6:
                seg = np.cos(s_grid)[:, None] * foot + np.sin(s_grid)[:, None] * n
            np.testing.assert_allclose(seg[-1], q, atol=1e-9)
            l1 = lorentzian_curve_length(seg)
            l2 = lorentzian_curve_length(seg[::3])
            extrap = (9 * l1 - l2) / 8
            assert extrap == pytest.approx(eps, abs=1e-8)

    def test_tilted_plane_level_consistency(self, rng):
        curve = synth_boundary_curve(a={2: 0.2})
        split = hull_of_boundary_curve(curve)
        planes = bar._mesh_face_planes(split.upper)
        pl = planes[len(planes) // 2]
        region = bar.eps_halfspace(pl, 0.15, "past")
        x = rng.uniform(-0.5, 0.5, 20)
        y = rng.uniform(-0.5, 0.5, 20)
        z = region.boundary_height(x, y)
        ok = np.isfinite(z)
        lev = pl.time_level(x[ok], y[ok], z[ok])
        np.testing.assert_allclose(lev, -np.sin(0.15), atol=1e-12)


class TestEpsNeighborhood:
    CURVE = synth_boundary_curve(a={2: 0.2}, n_samples=64)

    def test_single_plane_body_is_the_cap(self, rng):
        # a split with one face per sheet reduces to the plain eps cap
        region = bar.eps_halfspace(bar.plane_z0(), 0.3, "past")
        sheet = bar.EnvelopeSheet((region,), "upper")
        x = rng.uniform(-0.5, 0.5, 30)
        y = rng.uniform(-0.5, 0.5, 30)
        np.testing.assert_allclose(sheet(x, y), region.boundary_height(x, y))

    def test_two_face_roof_envelope(self):
        # min of two caps, continuous across the ridge
        p1 = bar.SpacelikePlane.from_chart_plane((0.15, 0.0, 1.0), 0.0, (0.0, 0.0, -1e-2))
        p2 = bar.SpacelikePlane.from_chart_plane((-0.15, 0.0, 1.0), 0.0, (0.0, 0.0, -1e-2))
        sheet = bar.EnvelopeSheet(
            (bar.eps_halfspace(p1, 0.2, "past"), bar.eps_halfspace(p2, 0.2, "past")), "upper"
        )
        xs = np.linspace(-0.4, 0.4, 321)
        z = sheet(xs, np.zeros_like(xs))
        caps = [r.boundary_height(xs, np.zeros_like(xs)) for r in sheet.regions]
        np.testing.assert_allclose(z, np.minimum(*caps))
        assert np.max(np.abs(np.diff(z))) < 5e-3  # no jumps across the ridge

    def test_envelope_fields(self):
        split = hull_of_boundary_curve(self.CURVE)
        past, future, _, _ = bar.eps_neighborhood_body(split, 0.15, curve=self.CURVE, nx=48, ny=48, r_max=0.9)
        assert bar.check_discrete_convexity(past)
        assert bar.check_discrete_convexity(future)
        gap = past.values - future.values
        assert np.nanmin(gap[past.mask & future.mask]) > 0

    def test_eps_budget_exceeded(self):
        # forced violation: check the envelope of one curve against the
        # black domain of a time-shifted curve
        split = hull_of_boundary_curve(self.CURVE)
        shifted = synth_boundary_curve(a={2: 0.2}, a0=1.2, n_samples=64)
        from adscmc.errors import EpsBudgetExceeded

        with pytest.raises(EpsBudgetExceeded):
            bar.eps_neighborhood_body(split, 0.15, curve=shifted, nx=32, ny=32, r_max=0.9)

    def test_eps_too_large_rejected(self):
        split = hull_of_boundary_curve(self.CURVE)
        with pytest.raises(EpsTooLarge):
            bar.eps_neighborhood_body(split, 1.6, curve=self.CURVE, nx=16, ny=16, r_max=0.8)


class TestCertifyUniformCurvature:
    def test_hemisphere_exact(self):
        fld = disc_field(HEMI, n=61, r=0.6)
        assert isinstance(bar.certify_uniform_curvature(fld, 1 + 1e-6), bar.CurvatureCert)
        assert isinstance(bar.certify_uniform_curvature(fld, 0.9), bar.CurvatureFailure)

    def test_flat_disc_fails_every_radius(self):
        fld = disc_field(lambda x, y: np.zeros_like(x), n=41, r=0.5)
        for radius in (0.5, 5.0, 500.0):
            assert isinstance(bar.certify_uniform_curvature(fld, radius), bar.CurvatureFailure)

    def test_trig_family_envelope_certifies(self):
        # the eps-neighborhood of the hull is more curved than a sphere of
        # radius ~(tan eps)^{-1}; chart slant distortion needs a 1.5 factor
        curve = synth_boundary_curve(a={2: 0.2}, n_samples=64)
        split = hull_of_boundary_curve(curve)
        past, future, _, _ = bar.eps_neighborhood_body(split, 0.15, curve=curve, nx=96, ny=96, r_max=0.9)
        radius = 1.5 / np.tan(0.15)
        assert isinstance(bar.certify_uniform_curvature(past, radius), bar.CurvatureCert)
        assert isinstance(bar.certify_uniform_curvature(future, radius), bar.CurvatureCert)


class TestPolyhedralApprox:
    def test_hemisphere_hausdorff(self):
        pa = bar.polyhedral_approx(HEMI, 0.1, 0.85, "upper")
        assert pa.hausdorff <= 0.01

    def test_sheet_faces_spacelike(self):
        pa = bar.polyhedral_approx(HEMI, 0.1, 0.85, "upper")
        ok, offenders = spacelike_support_planes(pa.sheet_mesh())
        assert ok, offenders

    def test_second_order_convergence(self):
        h1 = bar.polyhedral_approx(HEMI, 0.1, 0.85, "upper").hausdorff
        h2 = bar.polyhedral_approx(HEMI, 0.05, 0.85, "upper").hausdorff
        h3 = bar.polyhedral_approx(HEMI, 0.025, 0.85, "upper").hausdorff
        assert h2 <= h1 / 3.0
        assert 3.0 <= h2 / h3 <= 6.5
        # chord-height scale: C delta^2 / (2 R) with C <= 1
        assert h2 <= 0.05**2 / 2.0


class TestSmoothProfile:
    def test_constant_region(self):
        phi = bar.smooth_profile(0.1)
        assert phi(0.05) == pytest.approx(0.15)
        assert phi(0.0) == pytest.approx(0.15)

    def test_identity_region(self):
        phi = bar.smooth_profile(0.1)
        assert phi(0.3) == pytest.approx(0.3)
        assert phi(0.2) == pytest.approx(0.2, abs=1e-12)

    def test_joint_values(self):
        for kind in ("smoothstep", "bump"):
            phi = bar.smooth_profile(0.1, kind)
            assert phi(0.2) == pytest.approx(0.2, abs=1e-9)
            assert phi.derivative(0.2) == pytest.approx(1.0, abs=1e-9)
            assert phi.derivative(0.1) == pytest.approx(0.0, abs=1e-12)

    def test_monotone_convex(self):
        for kind in ("smoothstep", "bump"):
            phi = bar.smooth_profile(0.07, kind)
            t = np.linspace(0, 0.3, 4001)
            vals = phi(t)
            slopes = np.diff(vals)
            assert np.all(slopes >= -1e-15)
            assert np.all(np.diff(slopes) >= -1e-9)  # convex

    def test_dominates_identity_within_2eta(self):
        phi = bar.smooth_profile(0.05)
        t = np.linspace(0, 0.4, 1000)
        vals = phi(t)
        assert np.all(vals >= t - 1e-15)
        assert np.max(vals - t) <= 2 * 0.05 + 1e-15


class TestSmoothConvexGraph:
    def random_convex_field(self, rng, n=41, r=0.5) -> bar.HeightField:
        a, b, c = rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5), rng.uniform(-0.3, 0.3)
        while a * b - c * c <= 0.05:
            a, b, c = rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5), rng.uniform(-0.3, 0.3)
        x0, y0 = rng.uniform(-0.2, 0.2, 2)
        fn = lambda x, y: a * (x - x0) ** 2 + b * (y - y0) ** 2 + 2 * c * (x - x0) * (y - y0)
        return disc_field(fn, n=n, r=r, side="lower")

    def test_flat_side_becomes_constant(self):
        field = disc_field(lambda x, y: np.zeros_like(x), n=31, r=0.4, side="lower")
        out = bar.smooth_convex_graph(field, bar.smooth_profile(0.1))
        np.testing.assert_allclose(out.values[out.mask], 0.15)

    def test_ridge_becomes_c1(self):
        field = disc_field(lambda x, y: np.abs(x), n=201, r=0.5, side="lower")
        out = bar.smooth_convex_graph(field, bar.smooth_profile(0.1))
        xs = out.xs
        mid = len(xs) // 2
        row = out.values[:, mid]
        h = xs[1] - xs[0]
        slopes = np.diff(row) / h
        # C1 across the ridge: slope jump at the scale of the grid spacing
        assert np.max(np.abs(np.diff(slopes))) < 0.15
        # coincides with |x| where |x| >= 2 eta
        far = np.abs(xs) >= 0.21
        np.testing.assert_allclose(row[far], np.abs(xs)[far], atol=1e-12)

    def test_lemma_bullets_on_random_fields(self, rng):
        for _ in range(25):
            field = self.random_convex_field(rng)
            eta = float(rng.choice([0.05, 0.1]))
            out = bar.smooth_convex_graph(field, bar.smooth_profile(eta))
            f = field.values[field.mask]
            g = out.values[field.mask]
            assert np.all(g >= f - 1e-12)
            assert np.max(np.abs(g - f)) <= 2 * eta + 1e-12
            high = f >= 2 * eta
            np.testing.assert_allclose(g[high], f[high], atol=1e-12)
            low = f <= eta
            if np.any(low):
                np.testing.assert_allclose(g[low], 1.5 * eta, atol=1e-12)
            assert bar.check_discrete_convexity(out, tol=1e-7)

    def test_rejects_nonconvex(self):
        field = disc_field(lambda x, y: -(x**2) - y**2 + 0.5, n=41, r=0.5, side="lower")
        with pytest.raises(NotConvexInput):
            bar.smooth_convex_graph(field, bar.smooth_profile(0.05))


class TestMeanCurvature:
    def test_totally_geodesic_plane_zero(self, rng):
        flat = meancurv.chart_graph(lambda x, y: np.zeros_like(np.asarray(x, dtype=float)))
        for _ in range(10):
            x, y = rng.uniform(-0.6, 0.6, 2)
            assert meancurv.mean_curvature(flat, x, y) == pytest.approx(0.0, abs=1e-8)

    def test_tilted_plane_zero(self):
        # any spacelike totally geodesic plane has zero mean curvature
        tilted = meancurv.chart_graph(lambda x, y: 0.2 * np.asarray(x) - 0.1 * np.asarray(y) + 0.05)
        assert meancurv.mean_curvature(tilted, 0.1, -0.2) == pytest.approx(0.0, abs=1e-8)

    def test_orbit_matches_kappa(self):
        for th in (np.pi / 6, np.pi / 4, np.pi / 3):
            h_fd = meancurv.mean_curvature(lambda u, v, th=th: embed_orbit_vec(th, u, v), 0.1, 0.3, h=1e-3)
            assert h_fd == pytest.approx(kappa(th), abs=1e-5)

    def test_eps_cap_value(self):
        # the constant-distance cap of the base plane is umbilic with
        # principal curvature -2 tan(eps) each
        eps = 0.3
        cap = meancurv.chart_graph(lambda x, y: np.tan(eps) * np.sqrt(1 - np.asarray(x) ** 2 - np.asarray(y) ** 2))
        h = meancurv.mean_curvature(cap, 0.25, -0.12, h=1e-4)
        assert h == pytest.approx(-4 * np.tan(eps), abs=1e-6)

    def test_hull_face_interior_flat(self):
        curve = synth_boundary_curve(a={2: 0.2})
        split = hull_of_boundary_curve(curve)
        k = split.upper.n_faces // 2
        n, d = split.upper.normals[k], split.upper.offsets[k]
        verts = split.upper.vertices[split.upper.faces[k]]
        cx, cy = verts[:, 0].mean(), verts[:, 1].mean()
        face = meancurv.chart_graph(lambda x, y: (d - n[0] * np.asarray(x) - n[1] * np.asarray(y)) / n[2])
        assert meancurv.mean_curvature(face, cx, cy) == pytest.approx(0.0, abs=1e-8)

    def test_tangent_comparison(self, rng):
        # a surface locally in the future of another, tangent at a node,
        # has smaller or equal mean curvature there (future = smaller z)
        for _ in range(20):
            a, b = rng.uniform(0.1, 1.0, 2)
            base = meancurv.chart_graph(lambda x, y: 0.1 * np.asarray(x))
            bumped = meancurv.chart_graph(
                lambda x, y: 0.1 * np.asarray(x) - (a * np.asarray(x) ** 2 + b * np.asarray(y) ** 2)
            )
            h_base = meancurv.mean_curvature(base, 0.0, 0.0)
            h_bump = meancurv.mean_curvature(bumped, 0.0, 0.0)
            assert h_bump <= h_base + 1e-8

    def test_not_spacelike_raises(self):
        steep = meancurv.chart_graph(lambda x, y: 2.0 * np.asarray(x))
        with pytest.raises(NotSpacelikeHere):
            meancurv.mean_curvature(steep, 0.0, 0.0)

    def test_offset_principal_closed_form(self):
        # flat plane offset by eps becomes the cap with curvature 2 tan(eps)
        assert meancurv.offset_principal(0.0, 0.3) == pytest.approx(2 * np.tan(0.3))
        assert meancurv.offset_principal(0.0, -0.3) == pytest.approx(-2 * np.tan(0.3))


class TestPipelineSmall:
    def test_end_to_end_small_grid(self):
        curve = synth_boundary_curve(a={2: 0.2}, n_samples=64)
        res = bar.build_barriers(curve, eps=0.15, delta=0.08, eta=0.02, eps2=0.05, nx=40, ny=40, r_max=0.85)
        cert = res.certificate
        assert cert.h_minus_max < 0 < cert.h_plus_min
        assert cert.ordering_margin > 0
        assert cert.spacelike_margin > 0
        assert cert.in_black_domain
        assert cert.ok

    def test_eps2_shrink_degrades_margin(self):
        curve = synth_boundary_curve(a={2: 0.2}, n_samples=48)
        margins = []
        for eps2 in (0.05, 0.02, 0.008):
            res = bar.build_barriers(curve, eps=0.15, delta=0.1, eta=0.02, eps2=eps2, nx=32, ny=32, r_max=0.8)
            margins.append(-res.certificate.h_minus_max)
        assert margins[0] > margins[1] > margins[2] > 0

    def test_flat_fast_path(self):
        field, h = bar.flat_fast_path(nx=32, ny=32, r_max=0.8)
        assert np.nanmax(np.abs(h)) < 1e-8
        assert np.all(field.values[field.mask] == 0.0)

    def test_convexity_preserved_through_stages(self):
        # envelope, polyhedral sheet, smoothed sheet, and final offset all
        # pass the directional convexity test on the working grid
        curve = synth_boundary_curve(a={2: 0.2}, n_samples=64)
        split = hull_of_boundary_curve(curve)
        xs, ys, mask = bar.make_grid(40, 40, 0.8)
        past, _, past_sheet, _ = bar.eps_neighborhood_body(split, 0.15, xs=xs, ys=ys, mask=mask, curve=curve)
        assert bar.check_discrete_convexity(past)
        poly = bar.polyhedral_approx(past_sheet, 0.08, 0.84, "upper")
        poly_field = bar.realize_heightfield(
            lambda x, y: poly.sheet_mesh().plane_heights(x, y, "upper"), xs, ys, mask, "upper"
        )
        assert bar.check_discrete_convexity(poly_field)
        smooth = bar.smooth_sheet(poly.sheet_mesh(), bar.smooth_profile(0.02), "upper")
        smooth_field = bar.realize_heightfield(smooth, xs, ys, mask, "upper")
        assert bar.check_discrete_convexity(smooth_field, tol=1e-7)
        res = bar.build_barriers(curve, eps=0.15, delta=0.08, eta=0.02, eps2=0.05, nx=40, ny=40, r_max=0.8)
        assert bar.check_discrete_convexity(res.sigma_minus, tol=1e-6)
        assert bar.check_discrete_convexity(res.sigma_plus, tol=1e-6)

    def test_envelope_sheet_points_in_black_domain(self, rng):
        curve = synth_boundary_curve(a={2: 0.2}, n_samples=64)
        split = hull_of_boundary_curve(curve)
        from adscmc.core import ProjPoint
        from adscmc.hull import black_domain_test

        xs = rng.uniform(-0.6, 0.6, 50)
        ys = rng.uniform(-0.6, 0.6, 50)
        for side, mesh in (("upper", split.upper), ("lower", split.lower)):
            zs = mesh.plane_heights(xs, ys, side)
            for x, y, z in zip(xs, ys, zs):
                assert black_domain_test(ProjPoint(np.array([1.0, z, x, y])), curve)
