"""Estimator tests: closed forms, grid-search oracles, and properties."""

import numpy as np
import pytest
from conftest import balanced_single_tap_pilot

from onebit_chanest.estimators import (
    SEARCH_BOX,
    _quantized_fgh,
    jmap_mle,
    map_ideal,
    map_quantized_known,
    mle_ideal,
    mle_quantized_joint,
    mle_quantized_known,
    quantized_log_likelihood,
)
from onebit_chanest.fisher import crlb_quantized_unknown, fim_quantized
from onebit_chanest.pilots import (
    ChannelParams,
    GaussianPrior,
    make_pilot,
    quantize,
    sample_ideal,
    sample_quantized,
    signal_vector,
)


def _grid_argmax_2d(pilot, z, lo=-4.0, hi=4.0, step=1e-3, prior=None):
    """Exhaustive maximizer of the single-tap joint objective on a grid."""
    thetas = np.arange(lo, hi + step / 2, step)
    alphas = np.arange(lo, hi + step / 2, step)
    x = pilot.regressors[:, 0]
    best = (-np.inf, None, None)
    chunk = 200
    from scipy.special import log_ndtr

    for start in range(0, alphas.size, chunk):
        a_block = alphas[start : start + chunk]
        total = np.zeros((a_block.size, thetas.size))
        for n in range(pilot.n_symbols):
            w = z[n] * (a_block[:, None] - x[n] * thetas[None, :])
            total += log_ndtr(-w)
        if prior is not None:
            total -= 0.5 * (thetas[None, :] ** 2) / prior.variances[0]
        flat = int(np.argmax(total))
        value = float(total.flat[flat])
        if value > best[0]:
            ai, ti = np.unravel_index(flat, total.shape)
            best = (value, float(thetas[ti]), float(a_block[ai]))
    return best


class TestIdealEstimators:
    def test_noise_free_recovery(self):
        pilot = make_pilot(64, 3, seed=0)
        theta = np.array([0.8, -0.3, 0.1])
        result = mle_ideal(pilot, signal_vector(pilot, theta))
        assert np.allclose(result.theta_hat, theta, atol=1e-12)
        assert result.converged and result.alpha_hat is None

    def test_single_tap_is_correlator(self):
        pilot = make_pilot(128, 1, seed=1)
        y = sample_ideal(pilot, np.array([0.5]), np.random.default_rng(0))
        result = mle_ideal(pilot, y)
        assert result.theta_hat[0] == pytest.approx(
            float(pilot.symbols @ y) / 128.0, rel=1e-12
        )

    def test_matches_iterative_maximizer(self):
        # generic ascent on the Gaussian objective lands on the same point
        pilot = make_pilot(64, 2, seed=2)
        rng = np.random.default_rng(3)
        y = sample_ideal(pilot, rng.standard_normal(2), rng)
        closed = mle_ideal(pilot, y).theta_hat

        from scipy.optimize import minimize

        fun = lambda th: 0.5 * np.sum((y - pilot.regressors @ th) ** 2)
        iterative = minimize(fun, np.zeros(2), method="BFGS", tol=1e-12).x
        assert np.allclose(closed, iterative, atol=1e-8)

    def test_map_limits(self):
        pilot = make_pilot(64, 2, seed=4)
        rng = np.random.default_rng(5)
        y = sample_ideal(pilot, np.array([0.4, -0.2]), rng)
        wide = map_ideal(pilot, y, GaussianPrior(np.array([1e10, 1e10])))
        assert np.allclose(wide.theta_hat, mle_ideal(pilot, y).theta_hat, atol=1e-7)
        tight = map_ideal(pilot, y, GaussianPrior(np.array([1e-10, 1e-10])))
        assert np.allclose(tight.theta_hat, np.zeros(2), atol=1e-7)

    def test_map_matches_iterative(self):
        pilot = make_pilot(64, 2, seed=6)
        rng = np.random.default_rng(7)
        prior = GaussianPrior(np.array([0.5, 0.25]))
        y = sample_ideal(pilot, rng.standard_normal(2) * prior.stddevs, rng)
        closed = map_ideal(pilot, y, prior).theta_hat

        from scipy.optimize import minimize

        fun = lambda th: 0.5 * np.sum((y - pilot.regressors @ th) ** 2) + 0.5 * float(
            prior.precisions @ (th * th)
        )
        iterative = minimize(fun, np.zeros(2), method="BFGS", tol=1e-12).x
        assert np.allclose(closed, iterative, atol=1e-8)


class TestJointMle:
    def test_grid_oracle(self):
        pilot = balanced_single_tap_pilot(4)
        z = np.array([1.0, -1.0, -1.0, 1.0])  # both signs in both symbol classes
        result = mle_quantized_joint(pilot, z)
        _, theta_star, alpha_star = _grid_argmax_2d(pilot, z)
        assert result.converged and not result.boundary_active
        assert result.theta_hat[0] == pytest.approx(theta_star, abs=2e-3)
        assert result.alpha_hat == pytest.approx(alpha_star, abs=2e-3)

    def test_separable_data_is_flagged_not_raised(self):
        pilot = make_pilot(256, 1, seed=8)
        params = ChannelParams(np.array([10.0]), 0.0)
        z = sample_quantized(pilot, params, np.random.default_rng(9))
        assert np.array_equal(z, pilot.symbols)  # fully separable at this SNR
        result = mle_quantized_joint(pilot, z)
        assert result.boundary_active
        assert result.theta_hat[0] >= SEARCH_BOX - 1e-6

    def test_known_offset_grid_oracle(self):
        pilot = balanced_single_tap_pilot(8)
        rng = np.random.default_rng(10)
        z = sample_quantized(pilot, ChannelParams(np.array([0.7]), 0.3), rng)
        result = mle_quantized_known(pilot, z, 0.3)
        thetas = np.arange(-4.0, 4.0 + 5e-4, 1e-3)
        values = [quantized_log_likelihood(pilot, z, np.array([t]), 0.3) for t in thetas]
        theta_star = float(thetas[int(np.argmax(values))])
        assert result.theta_hat[0] == pytest.approx(theta_star, abs=2e-3)

    def test_sign_flip_equivariance(self):
        pilot = make_pilot(128, 2, seed=11)
        rng = np.random.default_rng(12)
        z = sample_quantized(pilot, ChannelParams(np.array([0.6, -0.4]), 0.2), rng)
        base = mle_quantized_joint(pilot, z)
        # flipping the output alone negates both estimates
        negated = mle_quantized_joint(pilot, -z)
        assert np.allclose(negated.theta_hat, -base.theta_hat, atol=1e-7)
        assert negated.alpha_hat == pytest.approx(-base.alpha_hat, abs=1e-7)
        # flipping output and pilot together leaves the taps in place
        from onebit_chanest.pilots import PilotDesign

        flipped_pilot = PilotDesign(-pilot.symbols, 2)
        flipped = mle_quantized_joint(flipped_pilot, -z)
        assert np.allclose(flipped.theta_hat, base.theta_hat, atol=1e-7)
        assert flipped.alpha_hat == pytest.approx(-base.alpha_hat, abs=1e-7)

    def test_joint_never_below_known_at_truth(self):
        rng = np.random.default_rng(13)
        pilot = make_pilot(64, 2, seed=14)
        for _ in range(10):
            params = ChannelParams(rng.uniform(-1, 1, 2), float(rng.uniform(-0.5, 0.5)))
            z = sample_quantized(pilot, params, rng)
            joint = mle_quantized_joint(pilot, z)
            known = mle_quantized_known(pilot, z, params.alpha)
            ll_joint = quantized_log_likelihood(pilot, z, joint.theta_hat, joint.alpha_hat)
            ll_known = quantized_log_likelihood(pilot, z, known.theta_hat, params.alpha)
            ll_truth = quantized_log_likelihood(pilot, z, params.theta, params.alpha)
            assert ll_joint >= ll_known - 1e-9
            assert ll_known >= ll_truth - 1e-9

    def test_consistency_over_growing_n(self):
        params = ChannelParams(np.array([0.7, -0.5]), 0.3)
        trials = 160
        ratios = []
        mses = []
        for n in (256, 1024, 4096):
            pilot = make_pilot(n, 2, seed=15)
            bound = np.trace(
                crlb_quantized_unknown(fim_quantized(pilot, params))
            )
            errs = np.zeros(trials)
            for t in range(trials):
                rng = np.random.default_rng(1_000_000 + 7 * t + n)
                z = sample_quantized(pilot, params, rng)
                est = mle_quantized_joint(pilot, z)
                errs[t] = float(np.sum((est.theta_hat - params.theta) ** 2))
            mses.append(errs.mean())
            ratios.append(errs.mean() / bound)
        assert mses[0] > mses[1] > mses[2]
        # ratio walks toward 1 within Monte-Carlo slack
        assert abs(ratios[2] - 1.0) <= abs(ratios[0] - 1.0) + 0.15
        assert abs(ratios[2] - 1.0) < 0.2


class TestJmapMle:
    def test_wide_prior_joins_mle(self):
        pilot = make_pilot(128, 2, seed=16)
        rng = np.random.default_rng(17)
        z = sample_quantized(pilot, ChannelParams(np.array([0.5, 0.2]), 0.1), rng)
        prior = GaussianPrior(np.array([1e10, 1e10]))
        a = jmap_mle(pilot, z, prior)
        b = mle_quantized_joint(pilot, z)
        assert np.allclose(a.theta_hat, b.theta_hat, atol=1e-6)
        assert a.alpha_hat == pytest.approx(b.alpha_hat, abs=1e-6)

    def test_grid_oracle_with_prior(self):
        pilot = balanced_single_tap_pilot(4)
        z = np.array([1.0, -1.0, -1.0, 1.0])
        prior = GaussianPrior(np.array([0.5]))
        result = jmap_mle(pilot, z, prior)
        _, theta_star, alpha_star = _grid_argmax_2d(pilot, z, prior=prior)
        assert result.theta_hat[0] == pytest.approx(theta_star, abs=2e-3)
        assert result.alpha_hat == pytest.approx(alpha_star, abs=2e-3)

    def test_tap_regularized_under_separability(self):
        # all-same-sign data: the threshold runs to the box while the
        # prior keeps the taps finite
        pilot = make_pilot(64, 1, seed=18)
        z = np.ones(64)
        prior = GaussianPrior(np.array([0.5]))
        result = jmap_mle(pilot, z, prior)
        assert result.boundary_active
        assert abs(result.alpha_hat) >= SEARCH_BOX - 1e-6
        assert abs(result.theta_hat[0]) < 1.0

    def test_map_known_wide_prior_joins_mle(self):
        pilot = make_pilot(128, 2, seed=19)
        rng = np.random.default_rng(20)
        z = sample_quantized(pilot, ChannelParams(np.array([0.5, 0.2]), 0.4), rng)
        prior = GaussianPrior(np.array([1e10, 1e10]))
        a = map_quantized_known(pilot, z, 0.4, prior)
        b = mle_quantized_known(pilot, z, 0.4)
        assert np.allclose(a.theta_hat, b.theta_hat, atol=1e-6)

    def test_map_known_grid_oracle(self):
        pilot = balanced_single_tap_pilot(8)
        rng = np.random.default_rng(21)
        z = sample_quantized(pilot, ChannelParams(np.array([0.9]), 0.2), rng)
        prior = GaussianPrior(np.array([0.25]))
        result = map_quantized_known(pilot, z, 0.2, prior)
        thetas = np.arange(-4.0, 4.0 + 5e-4, 1e-3)
        values = [
            quantized_log_likelihood(pilot, z, np.array([t]), 0.2)
            - 0.5 * t * t / prior.variances[0]
            for t in thetas
        ]
        theta_star = float(thetas[int(np.argmax(values))])
        assert result.theta_hat[0] == pytest.approx(theta_star, abs=2e-3)


class TestObjectiveCalculus:
    def _fd_gradient(self, fgh, point, step=1e-5):
        grad = np.zeros_like(point)
        for j in range(point.size):
            up = point.copy()
            up[j] += step
            down = point.copy()
            down[j] -= step
            grad[j] = (fgh(up)[0] - fgh(down)[0]) / (2.0 * step)
        return grad

    @pytest.mark.parametrize("with_prior,fixed_alpha", [
        (False, None), (True, None), (False, 0.3), (True, 0.3),
    ])
    def test_gradients_match_finite_differences(self, with_prior, fixed_alpha):
        rng = np.random.default_rng(22)
        pilot = make_pilot(64, 2, seed=23)
        prior = GaussianPrior(np.array([0.5, 0.25])) if with_prior else None
        z = sample_quantized(pilot, ChannelParams(np.array([0.4, -0.3]), 0.2), rng)
        fgh = _quantized_fgh(pilot, z, prior=prior, fixed_alpha=fixed_alpha)
        dim = 2 if fixed_alpha is not None else 3
        for _ in range(100):
            point = rng.uniform(-2.0, 2.0, dim)
            _, grad, _ = fgh(point)
            fd = self._fd_gradient(fgh, point)
            denom = max(float(np.linalg.norm(grad)), 1e-8)
            assert float(np.linalg.norm(grad - fd)) / denom <= 1e-5

    def test_hessian_negative_semidefinite(self):
        rng = np.random.default_rng(24)
        pilot = make_pilot(64, 3, seed=25)
        z = sample_quantized(pilot, ChannelParams(np.array([0.4, -0.3, 0.2]), 0.5), rng)
        fgh = _quantized_fgh(pilot, z)
        for _ in range(100):
            point = rng.uniform(-3.0, 3.0, 4)
            _, _, hess = fgh(point)
            assert float(np.max(np.linalg.eigvalsh(hess))) <= 1e-8

    def test_result_contract(self):
        pilot = make_pilot(64, 1, seed=26)
        z = sample_quantized(pilot, ChannelParams(np.array([0.5]), 0.0), np.random.default_rng(1))
        result = mle_quantized_joint(pilot, z)
        assert result.converged
        assert result.final_gradient_norm <= 1e-8
        assert result.iterations <= 200
        known = mle_quantized_known(pilot, z, 0.0)
        assert known.alpha_hat is None


class TestInputValidation:
    def test_rejects_bad_bits(self):
        pilot = make_pilot(16, 1, seed=0)
        with pytest.raises(ValueError):
            mle_quantized_joint(pilot, np.zeros(16))
        with pytest.raises(ValueError):
            mle_quantized_joint(pilot, np.ones(8))

    def test_rejects_bad_samples(self):
        pilot = make_pilot(16, 1, seed=0)
        with pytest.raises(ValueError):
            mle_ideal(pilot, np.full(16, np.nan))

    def test_rejects_prior_mismatch(self):
        pilot = make_pilot(16, 2, seed=0)
        z = quantize(np.zeros(16), -1.0)
        with pytest.raises(ValueError):
            jmap_mle(pilot, z, GaussianPrior(np.array([1.0])))
