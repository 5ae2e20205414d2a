"""Prior-averaged performance characterizations for random channel taps.

Two families live here.  The classical lower bounds take expectations of
information quantities first and invert afterwards.  The attainment
characterizations put the matrix inverse inside the prior expectation,
which is the quantity the joint estimators actually approach; for those
the expectation is evaluated by scrambled low-discrepancy sampling, with
one-dimensional adaptive quadrature kept as the single-tap reference.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special
from scipy.stats import qmc

from .errors import SingularFimError
from .fisher import loss_chi, loss_chi_star, loss_upsilon, spd_inverse
from .pilots import GaussianPrior, PilotDesign
from .qfunc import log_phi_n, phi_n

_METHODS = ("monte-carlo", "closed-form-linear")
_MIN_SAMPLES = 1000
_REJECT_FRACTION_LIMIT = 1e-3
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class PriorExpectationConfig:
    """How prior expectations are evaluated.

    ``closed-form-linear`` is valid only where the linear observation
    map makes the expectation exact; the sampling settings are ignored
    in that case.
    """

    method: str = "monte-carlo"
    sample_count: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.method == "monte-carlo" and self.sample_count < _MIN_SAMPLES:
            raise ValueError(f"sample_count must be at least {_MIN_SAMPLES}")


@dataclass(frozen=True)
class PriorBound:
    """A prior-averaged MSE matrix with sampling diagnostics.

    ``stderr`` is the elementwise standard error of the sample mean when
    the bound is a direct expectation over draws, otherwise None.
    ``reliable`` turns False when more than 0.1 percent of draws had to
    be rejected as numerically singular, since averaging an inverse is
    sensitive to the rejected tail.
    """

    mse: np.ndarray
    stderr: np.ndarray | None = None
    rejected: int = 0
    reliable: bool = True


def prior_draws(prior: GaussianPrior, cfg: PriorExpectationConfig) -> np.ndarray:
    """Scrambled Sobol draws from the prior, shape (sample_count, K)."""
    sampler = qmc.Sobol(d=prior.taps, scramble=True, seed=cfg.seed)
    with warnings.catch_warnings():
        # draw counts other than powers of two only cost a little uniformity
        warnings.simplefilter("ignore", UserWarning)
        u = sampler.random(cfg.sample_count)
    return special.ndtri(u) * prior.stddevs


def _chunked(total: int, chunk: int):
    start = 0
    while start < total:
        stop = min(start + chunk, total)
        yield start, stop
        start = stop


def _per_draw_blocks(pilot: PilotDesign, thetas: np.ndarray, alpha: float):
    """FIM blocks for every draw: (m, K, K), (m, K), (m,)."""
    x = pilot.regressors
    s = thetas @ x.T
    phi = phi_n(s, alpha)
    jtt = np.einsum("mn,nk,nl->mkl", phi, x, x)
    jta = -(phi @ x)
    jaa = phi.sum(axis=1)
    return jtt, jta, jaa


def ecrlb(pilot: PilotDesign, prior: GaussianPrior, cfg: PriorExpectationConfig) -> PriorBound:
    """Prior expectation of the ideal-receiver MSE matrix.

    The linear observation map makes the per-draw matrix identical for
    every draw, so both methods return the inverse Gram matrix; the
    sampling path reports a zero standard error for the same reason.
    """
    _check_prior(pilot, prior)
    inv = spd_inverse(pilot.gram, "ideal-receiver information matrix")
    if cfg.method == "closed-form-linear":
        return PriorBound(mse=inv)
    return PriorBound(mse=inv, stderr=np.zeros_like(inv))


def bcrlb(pilot: PilotDesign, prior: GaussianPrior, cfg: PriorExpectationConfig) -> PriorBound:
    """Classical Bayesian lower bound for the ideal receiver.

    Expected information plus the prior information, inverted.  Both are
    exact here: the expected information is the Gram matrix and the
    Gaussian prior contributes the inverse covariance analytically.
    """
    _check_prior(pilot, prior)
    info = pilot.gram + np.diag(prior.precisions)
    return PriorBound(mse=spd_inverse(info, "prior-regularized information matrix"))


def hcrlb(
    pilot: PilotDesign,
    prior: GaussianPrior,
    alpha: float,
    cfg: PriorExpectationConfig,
    include_prior_fim: bool = True,
) -> PriorBound:
    """Hybrid lower bound: expectations of the blocks first, then invert.

    The block expectations are taken over the prior, the threshold block
    is absorbed afterwards, and the prior information is added before
    inversion.  ``include_prior_fim=False`` drops the prior term, which
    is the asymptotic variant used for ordering comparisons.
    """
    _check_prior(pilot, prior)
    _require_sampling(cfg, "hcrlb")
    thetas = prior_draws(prior, cfg)
    k = pilot.taps
    jtt_sum = np.zeros((k, k))
    jta_sum = np.zeros(k)
    jaa_sum = 0.0
    chunk = _chunk_size(pilot)
    for start, stop in _chunked(len(thetas), chunk):
        jtt, jta, jaa = _per_draw_blocks(pilot, thetas[start:stop], alpha)
        jtt_sum += jtt.sum(axis=0)
        jta_sum += jta.sum(axis=0)
        jaa_sum += jaa.sum()
    m = len(thetas)
    jtt_mean = jtt_sum / m
    jta_mean = jta_sum / m
    jaa_mean = jaa_sum / m
    if jaa_mean <= 0.0:
        raise SingularFimError("expected threshold information is not positive")
    info = jtt_mean - np.outer(jta_mean, jta_mean) / jaa_mean
    if include_prior_fim:
        info = info + np.diag(prior.precisions)
    return PriorBound(mse=spd_inverse(info, "expected threshold-absorbed information"))


def _expectation_of_inverse(pilot, prior, alpha, cfg, known_threshold: bool) -> PriorBound:
    thetas = prior_draws(prior, cfg)
    k = pilot.taps
    total = np.zeros((k, k))
    total_sq = np.zeros((k, k))
    accepted = 0
    rejected = 0
    chunk = _chunk_size(pilot)
    for start, stop in _chunked(len(thetas), chunk):
        jtt, jta, jaa = _per_draw_blocks(pilot, thetas[start:stop], alpha)
        if known_threshold:
            mats = jtt
        else:
            # a fully saturated draw underflows every attenuation factor;
            # zero threshold information marks the draw for rejection
            safe_jaa = np.where(jaa > 0.0, jaa, 1.0)
            mats = jtt - (jta[:, :, None] * jta[:, None, :]) / safe_jaa[:, None, None]
            mats[jaa <= 0.0] = 0.0
        eigvals = np.linalg.eigvalsh(mats)
        good = (eigvals[:, 0] > 0.0) & (eigvals[:, 0] > 1e-12 * eigvals[:, -1])
        if np.any(good):
            inv = np.linalg.inv(mats[good])
            # near-underflow information still slips past the eigenvalue
            # filter; an overflowing inverse is a rejection as well
            with np.errstate(over="ignore"):
                finite = np.isfinite(inv).all(axis=(1, 2)) & np.isfinite(
                    (inv * inv).sum(axis=(1, 2))
                )
            inv = inv[finite]
            good[np.flatnonzero(good)[~finite]] = False
            # heavy-tailed configurations can saturate the accumulators;
            # an infinite mean or spread is the honest report then
            with np.errstate(over="ignore"):
                total += inv.sum(axis=0)
                total_sq += (inv * inv).sum(axis=0)
            accepted += int(good.sum())
        rejected += int((~good).sum())
    if accepted == 0:
        raise SingularFimError(
            "per-draw information was singular for every prior draw; the "
            "threshold-absorbed tap information carries no usable signal"
        )
    mean = total / accepted
    with np.errstate(over="ignore", invalid="ignore"):
        var = np.maximum(total_sq / accepted - mean * mean, 0.0)
    var = np.where(np.isnan(var), np.inf, var)
    stderr = np.sqrt(var / accepted)
    reliable = rejected <= _REJECT_FRACTION_LIMIT * len(thetas)
    return PriorBound(mse=mean, stderr=stderr, rejected=rejected, reliable=reliable)


def ehcrlb(
    pilot: PilotDesign, prior: GaussianPrior, alpha: float, cfg: PriorExpectationConfig
) -> PriorBound:
    """Prior expectation of the per-draw threshold-absorbed MSE matrix.

    The inverse sits inside the expectation, the opposite order from
    ``hcrlb``; this is the asymptotic error of the joint estimator that
    treats the taps as random and the threshold as unknown.
    """
    _check_prior(pilot, prior)
    _require_sampling(cfg, "ehcrlb")
    return _expectation_of_inverse(pilot, prior, alpha, cfg, known_threshold=False)


def ehcrlb_known_offset(
    pilot: PilotDesign, prior: GaussianPrior, alpha: float, cfg: PriorExpectationConfig
) -> PriorBound:
    """Same as ``ehcrlb`` but with the threshold treated as known."""
    _check_prior(pilot, prior)
    _require_sampling(cfg, "ehcrlb_known_offset")
    return _expectation_of_inverse(pilot, prior, alpha, cfg, known_threshold=True)


def _gauss_expect_log(log_fn, sigma: float) -> float:
    """Adaptive quadrature of exp(log_fn) against a zero-mean normal.

    The integrand is assembled in log space, so a value that overflows
    on its own still integrates cleanly once the Gaussian weight is
    folded in; this matters in the far tails of wide priors.
    """
    half_log_2pi = 0.5 * np.log(2.0 * np.pi)

    def integrand(t):
        return np.exp(log_fn(sigma * t) - 0.5 * t * t - half_log_2pi)

    value, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=0.0, epsrel=1e-11, limit=200)
    return value


def _single_tap_counts(pilot: PilotDesign):
    if pilot.taps != 1:
        raise ValueError("quadrature reference path requires a single tap")
    n_plus = float((pilot.symbols == 1.0).sum())
    n_minus = float((pilot.symbols == -1.0).sum())
    if n_plus == 0.0 or n_minus == 0.0:
        raise SingularFimError("one-sided pilot: tap and threshold are not separable")
    return n_plus, n_minus


def ehcrlb_quadrature_1tap(pilot: PilotDesign, prior: GaussianPrior, alpha: float) -> np.ndarray:
    """Single-tap reference path for ``ehcrlb`` via adaptive quadrature.

    With one tap and symbol-class counts (n1, n2) carrying attenuations
    (p1, p2), the threshold-absorbed information collapses to
    4 n1 n2 p1 p2 / (n1 p1 + n2 p2); its log stays finite everywhere,
    unlike the matrix path.
    """
    _check_prior(pilot, prior)
    n_plus, n_minus = _single_tap_counts(pilot)
    sigma = float(prior.stddevs[0])

    def log_mse(theta):
        lp = log_phi_n(theta, alpha)      # +1 symbol periods
        lm = log_phi_n(-theta, alpha)     # -1 symbol periods
        log_info = (
            np.log(4.0 * n_plus * n_minus)
            + lp
            + lm
            - np.logaddexp(np.log(n_plus) + lp, np.log(n_minus) + lm)
        )
        return -log_info

    return np.array([[_gauss_expect_log(log_mse, sigma)]])


def ehcrlb_known_quadrature_1tap(
    pilot: PilotDesign, prior: GaussianPrior, alpha: float
) -> np.ndarray:
    """Single-tap reference path for ``ehcrlb_known_offset``."""
    _check_prior(pilot, prior)
    n_plus, n_minus = _single_tap_counts(pilot)
    sigma = float(prior.stddevs[0])

    def log_mse(theta):
        lp = log_phi_n(theta, alpha)
        lm = log_phi_n(-theta, alpha)
        return -np.logaddexp(np.log(n_plus) + lp, np.log(n_minus) + lm)

    return np.array([[_gauss_expect_log(log_mse, sigma)]])


def hybrid_losses(
    pilot: PilotDesign, prior: GaussianPrior, alpha: float, cfg: PriorExpectationConfig
) -> dict:
    """Quantization and threshold losses of the hybrid model at one offset.

    Same tap-averaged diagonal ratios as the deterministic measures, fed
    with the prior-averaged MSE matrices; they depend on the threshold
    only.
    """
    mse_y = ecrlb(pilot, prior, cfg).mse
    mse_z = ehcrlb(pilot, prior, alpha, cfg).mse
    mse_z_star = ehcrlb_known_offset(pilot, prior, alpha, cfg).mse
    return {
        "chi": loss_chi(mse_y, mse_z),
        "chi_star": loss_chi_star(mse_y, mse_z_star),
        "upsilon": loss_upsilon(mse_z_star, mse_z),
    }


def _chunk_size(pilot: PilotDesign) -> int:
    return max(64, _CHUNK_ELEMENTS // max(pilot.n_symbols, 1))


def _check_prior(pilot: PilotDesign, prior: GaussianPrior) -> None:
    if prior.taps != pilot.taps:
        raise ValueError(
            f"prior has {prior.taps} variances but the pilot has {pilot.taps} taps"
        )


def _require_sampling(cfg: PriorExpectationConfig, what: str) -> None:
    if cfg.method != "monte-carlo":
        raise ValueError(f"{what} has no closed form; use the monte-carlo method")
