"""Likelihood and posterior maximizers for both receivers.

The full-resolution estimators have closed forms.  The 1-bit objectives
are smooth and concave, so a damped Newton ascent with an analytic
gradient and Hessian converges in a handful of steps; iterates are kept
inside a fixed search box because perfectly separable 1-bit data pushes
the unpenalized maximizer to infinity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

from .errors import RankDeficiencyError, SingularFimError
from .fisher import spd_inverse
from .pilots import GaussianPrior, PilotDesign

SEARCH_BOX = 8.0
GRAD_TOL = 1e-8
MAX_ITER = 200

_ARMIJO = 1e-4
_MIN_STEP = 1e-13
_LOG_2PI = float(np.log(2.0 * np.pi))

# perfectly separated data lets the log-likelihood reach its supremum of
# zero; anything this close to it has every sample deep in its own tail
_SEPARABLE_LOG_LIK = -1e-6


@dataclass(frozen=True)
class EstimateResult:
    """Outcome of one estimator call.

    ``alpha_hat`` is None exactly when the threshold was supplied as
    known.  ``boundary_active`` marks estimates clamped to the search
    box, the reproducible stand-in for a maximizer at infinity on
    separable data; such trials stay usable in Monte-Carlo averages.
    """

    theta_hat: np.ndarray
    alpha_hat: float | None
    iterations: int
    converged: bool
    final_gradient_norm: float
    boundary_active: bool = False


def _validate_bits(pilot: PilotDesign, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (pilot.n_symbols,):
        raise ValueError(f"z must have length {pilot.n_symbols}")
    if not np.all(np.abs(z) == 1.0):
        raise ValueError("z entries must be +1 or -1")
    return z


def _validate_samples(pilot: PilotDesign, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (pilot.n_symbols,):
        raise ValueError(f"y must have length {pilot.n_symbols}")
    if not np.all(np.isfinite(y)):
        raise ValueError("y entries must be finite")
    return y


def quantized_log_likelihood(pilot: PilotDesign, z, theta, alpha: float) -> float:
    """Log-likelihood of a +-1 vector under the hard-limited model."""
    z = _validate_bits(pilot, z)
    w = z * (alpha - pilot.regressors @ np.asarray(theta, dtype=float))
    return float(np.sum(special.log_ndtr(-w)))


def _tail_terms(w):
    """Per-sample log-likelihood pieces: value, -d/dw, and d^2/dw^2.

    The hazard ``lam`` is formed in log space; the curvature
    lam * (w - lam) is negative everywhere, which is what makes every
    objective in this module concave.
    """
    logq = special.log_ndtr(-w)
    lam = np.exp(-0.5 * w * w - 0.5 * _LOG_2PI - logq)
    return logq, lam, lam * (w - lam)


def _quantized_fgh(pilot, z, prior=None, fixed_alpha=None):
    """Build value/gradient/Hessian callable for the 1-bit objectives."""
    x = pilot.regressors
    k = pilot.taps
    precisions = None if prior is None else prior.precisions

    if fixed_alpha is None:

        def fgh(psi):
            theta, alpha = psi[:k], psi[k]
            w = z * (alpha - x @ theta)
            logq, lam, curv = _tail_terms(w)
            zl = z * lam
            value = float(logq.sum())
            grad = np.empty(k + 1)
            grad[:k] = x.T @ zl
            grad[k] = -zl.sum()
            hess = np.empty((k + 1, k + 1))
            hess[:k, :k] = (x * curv[:, None]).T @ x
            cross = -(curv[:, None] * x).sum(axis=0)
            hess[:k, k] = cross
            hess[k, :k] = cross
            hess[k, k] = curv.sum()
            if precisions is not None:
                value -= 0.5 * float(precisions @ (theta * theta))
                grad[:k] -= precisions * theta
                hess[:k, :k] -= np.diag(precisions)
            return value, grad, hess

    else:
        alpha = float(fixed_alpha)

        def fgh(theta_vec):
            w = z * (alpha - x @ theta_vec)
            logq, lam, curv = _tail_terms(w)
            value = float(logq.sum())
            grad = x.T @ (z * lam)
            hess = (x * curv[:, None]).T @ x
            if precisions is not None:
                value -= 0.5 * float(precisions @ (theta_vec * theta_vec))
                grad = grad - precisions * theta_vec
                hess = hess - np.diag(precisions)
            return value, grad, hess

    return fgh


def _projected_gradient_norm(x, grad, box):
    g = grad.copy()
    g[(x >= box) & (g > 0.0)] = 0.0
    g[(x <= -box) & (g < 0.0)] = 0.0
    return float(np.linalg.norm(g))


def _ascent_direction(grad, hess):
    """Solve the damped Newton system (-H + ridge I) d = g."""
    dim = grad.size
    scale = max(1.0, float(np.max(np.abs(np.diagonal(hess)))))
    ridge = 0.0
    while ridge <= 1e16 * scale:
        try:
            factor = linalg.cho_factor(-hess + ridge * np.eye(dim), lower=True)
            d = linalg.cho_solve(factor, grad)
            if grad @ d > 0.0:
                return d
        except linalg.LinAlgError:
            pass
        ridge = 1e-12 * scale if ridge == 0.0 else ridge * 10.0
    return grad / max(float(np.linalg.norm(grad)), 1.0)


def _newton_ascent(fgh, x0, box=SEARCH_BOX, tol=GRAD_TOL, max_iter=MAX_ITER):
    x = np.clip(np.asarray(x0, dtype=float), -box, box)
    value, grad, hess = fgh(x)
    iterations = 0
    while iterations < max_iter:
        if _projected_gradient_norm(x, grad, box) <= tol:
            break
        direction = _ascent_direction(grad, hess)
        slope = float(grad @ direction)
        step = 1.0
        accepted = False
        while step >= _MIN_STEP:
            candidate = np.clip(x + step * direction, -box, box)
            clipped = not np.array_equal(candidate, x + step * direction)
            new_value, new_grad, new_hess = fgh(candidate)
            if new_value >= value + _ARMIJO * step * slope or (clipped and new_value > value):
                accepted = True
                break
            step *= 0.5
        iterations += 1
        if not accepted:
            break
        x, value, grad, hess = candidate, new_value, new_grad, new_hess
    grad_norm = _projected_gradient_norm(x, grad, box)
    boundary = bool(np.any(np.abs(x) >= box - 1e-9))
    return x, iterations, grad_norm <= tol, grad_norm, boundary


def mle_ideal(pilot: PilotDesign, y) -> EstimateResult:
    """Maximum-likelihood taps for the full-resolution receiver.

    The Gaussian objective is maximized by the least-squares solution,
    so this is a closed form rather than an iteration.
    """
    y = _validate_samples(pilot, y)
    try:
        gram_inv = spd_inverse(pilot.gram, "regressor Gram matrix")
    except SingularFimError as exc:
        raise RankDeficiencyError(
            "regressor Gram matrix is singular; the pilot cannot identify the taps"
        ) from exc
    theta = gram_inv @ (pilot.regressors.T @ y)
    return EstimateResult(theta, None, 0, True, 0.0)


def map_ideal(pilot: PilotDesign, y, prior: GaussianPrior) -> EstimateResult:
    """Posterior maximizer for the full-resolution receiver, a ridge solve."""
    y = _validate_samples(pilot, y)
    _check_prior(pilot, prior)
    info = pilot.gram + np.diag(prior.precisions)
    theta = spd_inverse(info, "prior-regularized Gram matrix") @ (pilot.regressors.T @ y)
    return EstimateResult(theta, None, 0, True, 0.0)


def _clamp_separable(fgh, x, boundary):
    """Relocate an unpenalized solution onto the box when data separate.

    With every sample strictly classified the supremum sits at infinity
    and the gradient flattens below tolerance long before the box, so
    the box rarely activates on its own.  The flag comes from the
    objective value being at its supremum; the boxed point is taken only
    when it is itself an ascent (always true when the threshold scales
    along with the taps).
    """
    value = fgh(x)[0]
    if value <= _SEPARABLE_LOG_LIK:
        return x, boundary
    peak = float(np.max(np.abs(x)))
    if peak > 0.0:
        candidate = x * (SEARCH_BOX / peak)
        if fgh(candidate)[0] >= value:
            x = candidate
    return x, True


def mle_quantized_joint(pilot: PilotDesign, z) -> EstimateResult:
    """Joint maximum-likelihood taps and threshold from the 1-bit output.

    Perfectly separable data is reported clamped to the search box and
    flagged rather than raised, so the trial still contributes to
    Monte-Carlo averages.
    """
    z = _validate_bits(pilot, z)
    fgh = _quantized_fgh(pilot, z)
    x, iters, converged, gnorm, boundary = _newton_ascent(fgh, np.zeros(pilot.taps + 1))
    x, boundary = _clamp_separable(fgh, x, boundary)
    return EstimateResult(x[: pilot.taps], float(x[pilot.taps]), iters, converged, gnorm, boundary)


def mle_quantized_known(pilot: PilotDesign, z, alpha: float) -> EstimateResult:
    """Maximum-likelihood taps from the 1-bit output at a known threshold."""
    z = _validate_bits(pilot, z)
    fgh = _quantized_fgh(pilot, z, fixed_alpha=alpha)
    x, iters, converged, gnorm, boundary = _newton_ascent(fgh, np.zeros(pilot.taps))
    x, boundary = _clamp_separable(fgh, x, boundary)
    return EstimateResult(x, None, iters, converged, gnorm, boundary)


def jmap_mle(pilot: PilotDesign, z, prior: GaussianPrior) -> EstimateResult:
    """Joint maximizer of the 1-bit likelihood plus the Gaussian tap prior.

    The prior carries no information about the threshold, so separable
    data can still drive the threshold coordinate to the box even though
    the taps stay regularized; the boundary flag then refers to the
    threshold alone.
    """
    z = _validate_bits(pilot, z)
    _check_prior(pilot, prior)
    fgh = _quantized_fgh(pilot, z, prior=prior)
    x, iters, converged, gnorm, boundary = _newton_ascent(fgh, np.zeros(pilot.taps + 1))
    k = pilot.taps
    if quantized_log_likelihood(pilot, z, x[:k], x[k]) > _SEPARABLE_LOG_LIK:
        boundary = True
        if x[k] != 0.0:
            candidate = x.copy()
            candidate[k] = np.sign(x[k]) * SEARCH_BOX
            if fgh(candidate)[0] >= fgh(x)[0]:
                x = candidate
    return EstimateResult(x[:k], float(x[k]), iters, converged, gnorm, boundary)


def map_quantized_known(pilot: PilotDesign, z, alpha: float, prior: GaussianPrior) -> EstimateResult:
    """Posterior maximizer from the 1-bit output at a known threshold.

    The prior keeps the taps finite even on separable data; the flag is
    still raised then, but the estimate is the proper posterior mode.
    """
    z = _validate_bits(pilot, z)
    _check_prior(pilot, prior)
    fgh = _quantized_fgh(pilot, z, prior=prior, fixed_alpha=alpha)
    x, iters, converged, gnorm, boundary = _newton_ascent(fgh, np.zeros(pilot.taps))
    if quantized_log_likelihood(pilot, z, x, alpha) > _SEPARABLE_LOG_LIK:
        boundary = True
    return EstimateResult(x, None, iters, converged, gnorm, boundary)


def _check_prior(pilot: PilotDesign, prior: GaussianPrior) -> None:
    if prior.taps != pilot.taps:
        raise ValueError(
            f"prior has {prior.taps} variances but the pilot has {pilot.taps} taps"
        )
