import math

import numpy as np
import pytest

import oracles
from mrflab import (brute_force_log_z, build_grid, exact_log_likelihood,
                    exact_model_moments, recursive_log_z, sufficient_stats)
from mrflab.numutil import logit, inv_logit


def rand_theta(grid, rng, low=0.05, high=0.95):
    return low + (high - low) * rng.random(grid.p)


class TestBruteForce:
    def test_single_edge_is_log2(self):
        g = build_grid(1, 2)
        for t in (0.1, 0.5, 0.9):
            assert brute_force_log_z(np.array([t]), g) == pytest.approx(math.log(2), abs=1e-12)

    def test_chain_telescopes(self):
        # verified independently by summing all 8 configurations
        g = build_grid(1, 3)
        theta = np.array([0.62, 0.81])
        direct = math.log(oracles.partition_function(theta, g))
        assert direct == pytest.approx(math.log(2), abs=1e-12)
        assert brute_force_log_z(theta, g) == pytest.approx(math.log(2), abs=1e-12)

    def test_2x2_frozen_value(self):
        # 2*0.7^4 + 12*0.7^2*0.3^2 + 2*0.3^4 = 1.0256
        g = build_grid(2, 2)
        z = math.exp(brute_force_log_z(np.full(4, 0.7), g))
        assert z == pytest.approx(1.0256, abs=1e-12)

    def test_matches_independent_enumeration(self):
        g = build_grid(2, 3)
        rng = np.random.default_rng(0)
        for _ in range(10):
            theta = rand_theta(g, rng)
            assert brute_force_log_z(theta, g) == pytest.approx(
                math.log(oracles.partition_function(theta, g)), abs=1e-10)

    def test_enumeration_guard(self):
        g = build_grid(5, 5)
        with pytest.raises(ValueError):
            brute_force_log_z(np.full(g.p, 0.6), g)


class TestRecursive:
    def test_matches_brute_force_3x3(self):
        g = build_grid(3, 3)
        rng = np.random.default_rng(1)
        for _ in range(100):
            theta = rand_theta(g, rng)
            assert abs(recursive_log_z(theta, g) - brute_force_log_z(theta, g)) <= 1e-10

    @pytest.mark.parametrize("rows,cols", [(1, 2), (2, 1), (1, 7), (2, 5),
                                           (5, 2), (3, 4), (4, 3), (2, 2)])
    def test_matches_brute_force_shapes(self, rows, cols):
        g = build_grid(rows, cols)
        rng = np.random.default_rng(rows * 100 + cols)
        for _ in range(20):
            theta = rand_theta(g, rng)
            assert abs(recursive_log_z(theta, g) - brute_force_log_z(theta, g)) <= 1e-10

    def test_window_guard(self):
        g = build_grid(26, 26)
        with pytest.raises(ValueError):
            recursive_log_z(np.full(g.p, 0.6), g)

    def test_4x4_finite(self):
        g = build_grid(4, 4)
        theta = 0.5 + 0.3 * np.random.default_rng(2).random(g.p)
        assert math.isfinite(recursive_log_z(theta, g))

    def test_tree_identity(self):
        rng = np.random.default_rng(3)
        for c in range(2, 13):
            g = build_grid(1, c)
            for _ in range(10):
                theta = rand_theta(g, rng)
                assert recursive_log_z(theta, g) == pytest.approx(math.log(2), abs=1e-12)

    def test_agreement_swap_symmetry(self):
        # checkerboard flip swaps agreement/disagreement on the 2x2 cycle
        g = build_grid(2, 2)
        z_hi = recursive_log_z(np.full(4, 0.7), g)
        z_lo = recursive_log_z(np.full(4, 0.3), g)
        assert z_hi == pytest.approx(z_lo, abs=1e-12)

    def test_log_z_gradient_is_agreement_mean(self):
        # in natural coordinates the log-normalizer A(w) = log Z - sum log(1-theta)
        # has gradient E[s]; the base-measure term contributes the -theta shift
        def normalizer(w, g):
            th = inv_logit(w)
            return recursive_log_z(th, g) - float(np.log1p(-th).sum())

        for rows, cols in ((2, 2), (2, 3)):
            g = build_grid(rows, cols)
            theta = rand_theta(g, np.random.default_rng(rows + cols), 0.3, 0.8)
            mean, _ = exact_model_moments(theta, g)
            w = logit(theta)
            h = 1e-5
            for j in range(g.p):
                wp, wm = w.copy(), w.copy()
                wp[j] += h
                wm[j] -= h
                fd = (normalizer(wp, g) - normalizer(wm, g)) / (2 * h)
                assert fd == pytest.approx(mean[j], abs=1e-6)


class TestExactLogLikelihood:
    def test_single_edge_closed_form(self):
        g = build_grid(1, 2)
        stats = sufficient_stats(np.array([[0, 0], [0, 1], [1, 1]]), g)
        expected = 2 * math.log(0.7) + math.log(0.3) - 3 * math.log(2)
        assert exact_log_likelihood(stats, np.array([0.7]), g) == pytest.approx(expected, abs=1e-12)

    def test_matches_pointwise_enumeration(self):
        g = build_grid(2, 2)
        rng = np.random.default_rng(4)
        data = rng.integers(0, 2, (9, 4))
        theta = rand_theta(g, rng)
        stats = sufficient_stats(data, g)
        assert exact_log_likelihood(stats, theta, g) == pytest.approx(
            oracles.log_likelihood_pointwise(data, theta, g), abs=1e-9)

    def test_empty_stats_zero(self):
        from mrflab import SufficientStats
        g = build_grid(2, 2)
        stats = SufficientStats(agree=np.zeros(4, dtype=np.int64), n=0)
        assert exact_log_likelihood(stats, np.full(4, 0.7), g) == 0.0


class TestModelMoments:
    def test_single_edge_bernoulli(self):
        g = build_grid(1, 2)
        mean, cov = exact_model_moments(np.array([0.7]), g)
        assert mean[0] == pytest.approx(0.7, abs=1e-12)
        assert cov[0, 0] == pytest.approx(0.21, abs=1e-12)

    def test_flat_theta_half(self):
        g = build_grid(2, 2)
        mean, _ = exact_model_moments(np.full(4, 0.5), g)
        assert np.allclose(mean, 0.5, atol=1e-12)

    def test_against_independent_enumeration(self):
        g = build_grid(2, 2)
        theta = np.array([0.7, 0.6, 0.8, 0.55])
        mean, cov = exact_model_moments(theta, g)
        assert np.allclose(mean, oracles.agreement_means(theta, g), atol=1e-10)
        assert np.allclose(cov, oracles.agreement_cov(theta, g), atol=1e-10)

    def test_symmetry_and_guard(self):
        g = build_grid(2, 3)
        _, cov = exact_model_moments(rand_theta(g, np.random.default_rng(5)), g)
        assert np.allclose(cov, cov.T)
        assert np.all(cov.diagonal() >= 0) and np.all(cov.diagonal() <= 0.25)
        big = build_grid(5, 5)
        with pytest.raises(ValueError):
            exact_model_moments(np.full(big.p, 0.6), big)
