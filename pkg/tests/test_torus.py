import numpy as np
import pytest

from adscmc import meancurv, torus
from adscmc.core import SL2Matrix, b_eval, q_eval
from adscmc.errors import NotInU
from adscmc.torus import (
    LatticePair,
    OrbitType,
    TorusPoint,
    cmc_time,
    embed_orbit,
    embed_orbit_vec,
    kappa,
    normalize_to_rotation,
    orbit_classify,
    orbit_first_form,
    orbit_second_form,
    principal_curvatures,
    slice_volume_density,
    theta,
    transported_normal,
)


def translate(p: TorusPoint, a: float, b: float) -> TorusPoint:
    g = SL2Matrix.diag_exp(a).matrix @ p.g.matrix @ SL2Matrix.diag_exp(-b).matrix
    return TorusPoint(SL2Matrix.from_matrix(g))


class TestTheta:
    def test_rotation(self):
        assert theta(TorusPoint(SL2Matrix.rotation(np.pi / 4))) == pytest.approx(np.pi / 4)

    def test_worked_matrix(self):
        p = TorusPoint(SL2Matrix(1.0, 1.0, -0.5, 0.5))
        assert theta(p) == pytest.approx(np.pi / 4, abs=1e-14)
        # both defining equalities hold
        assert np.cos(theta(p)) ** 2 == pytest.approx(p.g.a * p.g.d, abs=1e-14)
        assert -np.sin(theta(p)) ** 2 == pytest.approx(p.g.b * p.g.c, abs=1e-14)

    def test_continuity_toward_zero(self):
        # ad -> 1 means theta -> 0, monotonically on a sampled path
        thetas = []
        for eps in np.linspace(0.4, 0.02, 12):
            g = SL2Matrix.rotation(eps)
            thetas.append(theta(TorusPoint(g)))
        assert all(a > b for a, b in zip(thetas, thetas[1:]))

    def test_not_in_u(self):
        with pytest.raises(NotInU):
            TorusPoint(SL2Matrix(1.0, 0.5, 0.5, 1.25))


class TestNormalizeToRotation:
    def test_rotation_is_fixed(self):
        t, s, th = normalize_to_rotation(TorusPoint(SL2Matrix.rotation(np.pi / 4)))
        assert (t, s) == (0.0, 0.0)
        assert th == pytest.approx(np.pi / 4)

    def test_worked_matrix(self):
        p = TorusPoint(SL2Matrix(1.0, 1.0, -0.5, 0.5))
        t, s, th = normalize_to_rotation(p)
        assert t == pytest.approx(-np.log(2) / 2, abs=1e-14)
        assert s == pytest.approx(0.0, abs=1e-14)
        product = SL2Matrix.diag_exp(t).matrix @ p.g.matrix @ SL2Matrix.diag_exp(-s).matrix
        np.testing.assert_allclose(product, SL2Matrix.rotation(np.pi / 4).matrix, atol=1e-12)

    def test_defining_identity(self, rng):
        for _ in range(20):
            th = rng.uniform(0.1, np.pi / 2 - 0.1)
            a, b = rng.uniform(-1.5, 1.5, 2)
            p = TorusPoint(SL2Matrix.from_matrix(embed_orbit(th, a, b).sl2().matrix))
            t, s, th_out = normalize_to_rotation(p)
            assert th_out == pytest.approx(th, abs=1e-12)
            product = SL2Matrix.diag_exp(t).matrix @ p.g.matrix @ SL2Matrix.diag_exp(-s).matrix
            np.testing.assert_allclose(product, SL2Matrix.rotation(th).matrix, atol=1e-10)

    def test_equivariance(self, rng):
        p = TorusPoint(SL2Matrix(1.0, 1.0, -0.5, 0.5))
        t0, s0, th0 = normalize_to_rotation(p)
        for _ in range(10):
            a, b = rng.uniform(-1.0, 1.0, 2)
            t1, s1, th1 = normalize_to_rotation(translate(p, a, b))
            assert th1 == pytest.approx(th0, abs=1e-12)
            assert t1 == pytest.approx(t0 - a, abs=1e-12)
            assert s1 == pytest.approx(s0 - b, abs=1e-12)


class TestOrbitClassify:
    def test_hyp_hyp_identity_euclidean_line(self):
        cls = orbit_classify(SL2Matrix.identity(), "hyp-hyp")
        assert (cls.dim, cls.type) == (1, OrbitType.EUCLIDEAN_LINE)

    def test_hyp_hyp_interior_euclidean_plane(self):
        cls = orbit_classify(SL2Matrix.rotation(0.6), "hyp-hyp")
        assert (cls.dim, cls.type) == (2, OrbitType.EUCLIDEAN_PLANE)

    def test_par_par_identity_isotropic_line(self):
        cls = orbit_classify(SL2Matrix.identity(), "par-par")
        assert (cls.dim, cls.type) == (1, OrbitType.ISOTROPIC_LINE)

    def test_hyp_hyp_off_component_not_spacelike(self):
        # ad > 1 (bc > 0): Minkowski-plane orbit
        cls = orbit_classify(SL2Matrix(2.0, 1.0, 1.0, 1.0), "hyp-hyp")
        assert (cls.dim, cls.type) == (2, OrbitType.MINKOWSKI_PLANE)

    def test_random_u_always_euclidean_plane(self, rng):
        for _ in range(50):
            th = rng.uniform(0.05, np.pi / 2 - 0.05)
            t, s = rng.uniform(-1.5, 1.5, 2)
            g = embed_orbit(th, t, s).sl2()
            cls = orbit_classify(g, "hyp-hyp")
            assert (cls.dim, cls.type) == (2, OrbitType.EUCLIDEAN_PLANE)

    def test_boundary_strata_never_spacelike(self, rng):
        # ad = 1 (bc = 0): degenerate or 1-dimensional orbits
        for t in (-0.8, 0.0, 1.1):
            g = SL2Matrix(np.exp(t), 0.0, 0.0, np.exp(-t))
            cls = orbit_classify(g, "hyp-hyp")
            assert cls.type is not OrbitType.EUCLIDEAN_PLANE


class TestFundamentalForms:
    def test_first_form_seed_values(self):
        assert orbit_first_form(np.pi / 4, 1, 0) == pytest.approx(1.0)
        assert orbit_first_form(np.pi / 4, 1, 1) == pytest.approx(2.0)

    def test_second_form_seed_values(self):
        assert orbit_second_form(np.pi / 4, 1, 0) == pytest.approx(0.0)
        assert orbit_second_form(np.pi / 4, 1, 1) == pytest.approx(-4.0)

    def test_first_form_positive_definite(self):
        for th in np.linspace(0.05, np.pi / 2 - 0.05, 25):
            m = np.array(
                [
                    [orbit_first_form(th, 1, 0), (orbit_first_form(th, 1, 1) - orbit_first_form(th, 1, -1)) / 4],
                    [(orbit_first_form(th, 1, 1) - orbit_first_form(th, 1, -1)) / 4, orbit_first_form(th, 0, 1)],
                ]
            )
            assert np.min(np.linalg.eigvalsh(m)) > 0

    def test_first_form_matches_embedding_metric(self):
        h = 1e-4
        for th in (0.4, np.pi / 4, 1.1):
            for p, q in ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.7, -0.3)):
                f0 = embed_orbit_vec(th, 0.0, 0.0)
                fp = embed_orbit_vec(th, h * p, h * q)
                fm = embed_orbit_vec(th, -h * p, -h * q)
                vel = (fp - fm) / (2 * h)
                assert q_eval(vel) == pytest.approx(orbit_first_form(th, p, q), abs=1e-6)

    def test_second_form_matches_normal_derivative(self):
        # II(X, X) = -2 B_Q(X, d/dt n(c(t))) with the doubled convention
        h = 1e-5
        for th in (0.5, np.pi / 4, 1.0):
            for p, q in ((1.0, 1.0), (1.0, -1.0), (0.3, 0.9)):
                vel = (embed_orbit_vec(th, h * p, h * q) - embed_orbit_vec(th, -h * p, -h * q)) / (2 * h)
                n_plus = transported_normal(th, h * p, h * q)
                n_minus = transported_normal(th, -h * p, -h * q)
                dn = (n_plus - n_minus) / (2 * h)
                assert -2.0 * b_eval(vel, dn) == pytest.approx(orbit_second_form(th, p, q), abs=1e-5)


class TestCurvature:
    def test_maximal_leaf(self):
        assert kappa(np.pi / 4) == pytest.approx(0.0, abs=1e-15)
        k1, k2 = principal_curvatures(np.pi / 4)
        assert (k1, k2) == (pytest.approx(-2.0), pytest.approx(2.0))

    def test_reference_leaf_values(self):
        assert kappa(np.pi / 8) == pytest.approx(-4.0, abs=1e-12)
        assert kappa(np.pi / 6) == pytest.approx(-4.0 / np.sqrt(3), abs=1e-12)

    def test_sum_identity_on_grid(self):
        thetas = np.linspace(0.01, np.pi / 2 - 0.01, 1000)
        k1 = -2.0 / np.tan(thetas)
        k2 = 2.0 * np.tan(thetas)
        np.testing.assert_allclose(k1 + k2, kappa(thetas), atol=1e-12, rtol=1e-12)

    def test_strictly_increasing(self):
        thetas = np.linspace(0.05, np.pi / 2 - 0.05, 500)
        k = kappa(thetas)
        assert np.all(np.diff(k) > 0)

    def test_cmc_time_orbit_invariant(self, rng):
        p = TorusPoint(SL2Matrix(1.0, 1.0, -0.5, 0.5))
        assert cmc_time(p) == pytest.approx(0.0, abs=1e-14)
        for _ in range(5):
            a, b = rng.uniform(-1.0, 1.0, 2)
            assert cmc_time(translate(p, a, b)) == pytest.approx(0.0, abs=1e-12)

    def test_cmc_time_increases_along_rotation_curve(self):
        ths = np.linspace(0.2, 1.3, 30)
        times = [cmc_time(TorusPoint(SL2Matrix.rotation(t))) for t in ths]
        assert all(a < b for a, b in zip(times, times[1:]))


class TestEmbedding:
    def test_rotation_point(self):
        p = embed_orbit(0.7, 0.0, 0.0)
        np.testing.assert_allclose(p.sl2().matrix, SL2Matrix.rotation(0.7).matrix, atol=1e-14)
        assert q_eval(p.v) == pytest.approx(-1.0, abs=1e-14)

    def test_density_ratio(self):
        assert slice_volume_density(np.pi / 4) / slice_volume_density(np.pi / 8) == pytest.approx(np.sqrt(2))

    def test_normal_is_unit_future_and_orthogonal(self, rng):
        for _ in range(10):
            th = rng.uniform(0.1, np.pi / 2 - 0.1)
            t, s = rng.uniform(-1.0, 1.0, 2)
            f = embed_orbit_vec(th, t, s)
            n = transported_normal(th, t, s)
            assert q_eval(n) == pytest.approx(-1.0, abs=1e-12)
            assert b_eval(f, n) == pytest.approx(0.0, abs=1e-12)
            from adscmc.core import future_reference

            assert b_eval(n, future_reference(f)) < 0  # future-directed

    def test_finite_difference_mean_curvature_matches_kappa(self):
        for th in (np.pi / 6, np.pi / 4, np.pi / 3):
            h_fd = meancurv.mean_curvature(lambda u, v, th=th: embed_orbit_vec(th, u, v), 0.2, -0.4, h=1e-3)
            assert h_fd == pytest.approx(kappa(th), abs=1e-5)

    def test_foliation_table_columns(self):
        lat = LatticePair((1.0, 0.0), (0.0, 1.0))
        table = torus.foliation_table(np.array([np.pi / 8, np.pi / 4]), lat)
        assert table.shape == (2, 5)
        assert table[0, 1] == pytest.approx(-4.0)
        assert table[1, 1] == pytest.approx(0.0, abs=1e-14)


class TestLattice:
    def test_reduce_into_cell(self):
        lat = LatticePair((1.0, 0.0), (0.5, 2.0))
        t, s = lat.reduce(3.7, -1.2)
        coeff = np.linalg.solve(lat.matrix, [t, s])
        assert np.all(coeff >= -1e-12) and np.all(coeff < 1 + 1e-12)

    def test_degenerate_lattice_rejected(self):
        with pytest.raises(ValueError):
            LatticePair((1.0, 2.0), (2.0, 4.0))

    def test_leaf_area(self):
        lat = LatticePair((2.0, 0.0), (0.0, 3.0))
        assert torus.leaf_area(np.pi / 4, lat) == pytest.approx(6.0)
