import numpy as np
import pytest

from adscmc import solver
from adscmc.errors import NotSpacelike
from adscmc.solver import TorusGraph, graph_mean_curvature, maximum_principle_check, relax_to_maximal
from adscmc.torus import LatticePair, kappa

LAT = LatticePair((1.0, 0.0), (0.0, 1.0))


def constant_graph(theta, n=32, lattice=LAT) -> TorusGraph:
    return TorusGraph(lattice, np.full((n, n), theta))


class TestGraphMeanCurvature:
    def test_maximal_leaf(self):
        h = graph_mean_curvature(constant_graph(np.pi / 4))
        np.testing.assert_allclose(h, 0.0, atol=1e-6)

    def test_pi_sixth_leaf(self):
        h = graph_mean_curvature(constant_graph(np.pi / 6))
        np.testing.assert_allclose(h, -4.0 / np.sqrt(3), atol=1e-5)

    def test_skewed_lattice(self):
        lat = LatticePair((1.0, 0.2), (-0.3, 0.8))
        h = graph_mean_curvature(constant_graph(0.6, n=48, lattice=lat))
        np.testing.assert_allclose(h, kappa(0.6), atol=1e-4)

    def test_small_perturbation_mean(self):
        n = 64
        t = np.arange(n) / n
        u = np.pi / 4 + 0.01 * np.sin(2 * np.pi * t)[:, None] * np.ones((1, n))
        h = graph_mean_curvature(TorusGraph(LAT, u))
        # mean over nodes agrees with kappa(mean angle) to first order
        assert abs(np.mean(h) - kappa(np.mean(u))) < 5e-3

    def test_not_spacelike_detected(self):
        n = 24
        u = np.full((n, n), 0.7)
        u[3, :] = 0.05
        u[4, :] = 1.5  # violent jump: timelike gradient
        with pytest.raises(NotSpacelike):
            graph_mean_curvature(TorusGraph(LAT, u))

    def test_second_order_convergence(self):
        # for constant angle fields the error against kappa is O(h^2);
        # measured on a skewed lattice (grid axes aligned with the
        # diagonal translations are super-convergent: the exponential
        # entry errors cancel and the error sits at roundoff)
        lat = LatticePair((1.0, 0.2), (-0.3, 0.8))
        errors = []
        for n in (16, 32, 64):
            h = graph_mean_curvature(constant_graph(0.6, n=n, lattice=lat))
            errors.append(np.max(np.abs(h - kappa(0.6))))
        assert 3.5 <= errors[0] / errors[1] <= 4.5
        assert 3.5 <= errors[1] / errors[2] <= 4.5

    def test_aligned_lattice_superconvergent(self):
        h = graph_mean_curvature(constant_graph(0.6, n=16))
        assert np.max(np.abs(h - kappa(0.6))) < 1e-10


class TestRelaxation:
    def test_fixed_point_needs_no_iterations(self):
        rep = relax_to_maximal(constant_graph(np.pi / 4), 0.3, 1.2)
        assert rep.iterations == 0
        assert rep.max_h <= 1e-6

    def test_constant_converges_to_maximal_leaf(self):
        rep = relax_to_maximal(constant_graph(0.5, n=32), 0.3, 1.2, tol_h=1e-6)
        assert rep.converged
        assert np.max(np.abs(rep.u - np.pi / 4)) <= 1e-3
        assert not rep.barrier_contact_lower and not rep.barrier_contact_upper
        assert rep.trailing_monotone()

    def test_sine_perturbation_flattens(self):
        n = 32
        u0 = np.pi / 4 + 0.1 * np.sin(2 * np.pi * np.arange(n) / n)[:, None] * np.ones((1, n))
        rep = relax_to_maximal(TorusGraph(LAT, u0), 0.3, 1.2, tol_h=1e-6)
        assert np.max(np.abs(rep.u - np.pi / 4)) < 1e-3

    def test_clamp_contract(self):
        rep = relax_to_maximal(constant_graph(0.5, n=16), 0.4, 0.9, tol_h=1e-5)
        assert np.all(rep.u >= 0.4) and np.all(rep.u <= 0.9)

    def test_initialization_independence(self):
        rep1 = relax_to_maximal(constant_graph(0.45, n=24), 0.3, 1.2, tol_h=1e-6)
        n = 24
        u0 = np.pi / 4 + 0.08 * np.cos(2 * np.pi * np.arange(n) / n)[None, :] * np.ones((n, 1))
        rep2 = relax_to_maximal(TorusGraph(LAT, u0), 0.3, 1.2, tol_h=1e-6)
        assert np.max(np.abs(rep1.u - rep2.u)) <= 1e-3

    def test_plain_fixed_step_mode(self):
        # the literal update u <- clamp(u - tau H) on a small grid
        rep = relax_to_maximal(constant_graph(0.7, n=8), 0.3, 1.2, tau=0.1 * (1 / 8) ** 2, tol_h=1e-4, max_iter=200000)
        assert rep.converged
        assert abs(np.mean(rep.u) - np.pi / 4) < 1e-3

    def test_invalid_barriers_rejected(self):
        with pytest.raises(ValueError):
            relax_to_maximal(constant_graph(0.5), 0.3, 0.7)  # both below pi/4
        with pytest.raises(ValueError):
            relax_to_maximal(constant_graph(0.5), 1.2, 0.3)

    def test_report_dict_round_trip(self):
        rep = relax_to_maximal(constant_graph(0.6, n=16), 0.3, 1.2, tol_h=1e-5)
        d = rep.to_dict()
        assert d["converged"] is True
        assert d["max_h"] <= 1e-5
        assert isinstance(rep.surface, TorusGraph)


class TestMaximumPrinciple:
    def test_tangent_bump_above(self):
        n = 24
        base = constant_graph(np.pi / 4, n=n)
        t = (np.arange(n) - n // 2) / n
        bump = 0.05 * np.outer(t**2, np.ones(n))
        bump -= bump[n // 2, 0]  # vanish at the tangency node
        upper = TorusGraph(LAT, base.u + np.maximum(bump, 0.0))
        assert maximum_principle_check(base, upper, (n // 2, 0))

    def test_equal_surfaces(self):
        g = constant_graph(0.6, n=16)
        assert maximum_principle_check(g, g, (3, 5))

    def test_fuzz_random_tangent_bumps(self, rng):
        n = 20
        for _ in range(100):
            th = rng.uniform(0.45, 1.1)
            base = constant_graph(th, n=n)
            i0, j0 = int(rng.integers(n)), int(rng.integers(n))
            ii = (np.arange(n) - i0 + n // 2) % n - n // 2
            jj = (np.arange(n) - j0 + n // 2) % n - n // 2
            r2 = (np.add.outer(ii**2, jj**2)) / n**2
            amp = rng.uniform(0.005, 0.05)
            bump = amp * r2
            upper = TorusGraph(LAT, np.clip(base.u + bump, 0.05, np.pi / 2 - 0.05))
            assert maximum_principle_check(base, upper, (i0, j0), tol=1e-6)

    def test_rejects_non_tangent(self):
        g1 = constant_graph(0.5, n=8)
        g2 = constant_graph(0.6, n=8)
        with pytest.raises(ValueError):
            maximum_principle_check(g1, g2, (0, 0))
