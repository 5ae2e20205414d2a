"""Fisher information and deterministic error bounds for both receivers.

All bound matrices are plain K x K numpy arrays in squared amplitude
units.  Inverses go through a symmetric positive definite factorization;
a failure raises instead of silently regularizing, because a singular
information matrix signals a modeling problem, not a numerical one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import RankDeficiencyError, SingularFimError
from .pilots import ChannelParams, PilotDesign, signal_vector
from .qfunc import phi_n, phi_zero


@dataclass(frozen=True)
class FimBlocks:
    """Block decomposition of the 1-bit receiver information matrix.

    ``j_theta_theta`` is K x K, ``j_theta_alpha`` is the length-K
    coupling with the threshold, and ``j_alpha_alpha`` is the scalar
    threshold information.
    """

    j_theta_theta: np.ndarray
    j_theta_alpha: np.ndarray
    j_alpha_alpha: float

    @property
    def taps(self) -> int:
        return self.j_theta_alpha.size

    def full(self) -> np.ndarray:
        """Assemble the (K+1) x (K+1) information matrix."""
        k = self.taps
        out = np.empty((k + 1, k + 1))
        out[:k, :k] = self.j_theta_theta
        out[:k, k] = self.j_theta_alpha
        out[k, :k] = self.j_theta_alpha
        out[k, k] = self.j_alpha_alpha
        return out

    def schur_complement(self) -> np.ndarray:
        """Effective tap information once the threshold is absorbed."""
        jta = self.j_theta_alpha
        return self.j_theta_theta - np.outer(jta, jta) / self.j_alpha_alpha


def spd_inverse(mat: np.ndarray, what: str) -> np.ndarray:
    """Invert a symmetric positive definite matrix via Cholesky."""
    try:
        factor = linalg.cho_factor(mat, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularFimError(f"{what} is singular or indefinite") from exc
    # a numerically singular matrix leaves a sqrt(eps)-scale pivot that
    # LAPACK happily accepts; reject such factors
    diag = np.abs(np.diagonal(factor[0]))
    if diag.min() <= 1e-7 * diag.max():
        raise SingularFimError(f"{what} is singular or indefinite")
    inv = linalg.cho_solve(factor, np.eye(mat.shape[0]))
    if not np.all(np.isfinite(inv)):
        raise SingularFimError(f"{what} is singular or indefinite")
    return 0.5 * (inv + inv.T)


def pinv_diagnostic(mat: np.ndarray, rel_tol: float = 1e-12) -> np.ndarray:
    """Eigenvalue-thresholded pseudo-inverse.

    Diagnostic use only; bound-reporting paths must raise on singular
    input rather than fall back to this.
    """
    vals, vecs = np.linalg.eigh(mat)
    cut = rel_tol * max(vals.max(), 0.0)
    inv_vals = np.where(vals > cut, 1.0 / np.where(vals > cut, vals, 1.0), 0.0)
    return (vecs * inv_vals) @ vecs.T


def fim_ideal(pilot: PilotDesign, theta=None) -> np.ndarray:
    """Information matrix of the full-resolution receiver.

    For the linear ISI map this is the regressor Gram matrix and does
    not depend on the tap values; ``theta`` is accepted for interface
    symmetry and only validated.
    """
    if theta is not None:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (pilot.taps,):
            raise ValueError(f"theta must have length {pilot.taps}")
    return np.array(pilot.gram)


def fim_quantized(pilot: PilotDesign, params: ChannelParams) -> FimBlocks:
    """Information blocks of the 1-bit receiver at the given parameters."""
    s = signal_vector(pilot, params.theta)
    phi = np.atleast_1d(phi_n(s, params.alpha))
    x = pilot.regressors
    weighted = phi[:, None] * x
    return FimBlocks(
        j_theta_theta=weighted.T @ x,
        j_theta_alpha=-weighted.sum(axis=0),
        j_alpha_alpha=float(phi.sum()),
    )


def crlb_ideal(pilot: PilotDesign, theta=None) -> np.ndarray:
    """Asymptotic MSE matrix of the full-resolution ML estimate."""
    fim = fim_ideal(pilot, theta)
    try:
        return spd_inverse(fim, "ideal-receiver information matrix")
    except SingularFimError as exc:
        raise RankDeficiencyError(
            "ideal-receiver information matrix is singular: the pilot's "
            "regressor Gram matrix is rank deficient"
        ) from exc


def crlb_quantized_unknown(blocks: FimBlocks) -> np.ndarray:
    """Asymptotic tap MSE of the 1-bit receiver with an unknown threshold.

    Inverse of the Schur complement of the threshold block, formed as an
    explicit rank-1 downdate of the tap block.
    """
    return spd_inverse(
        blocks.schur_complement(),
        "threshold-absorbed information (Schur complement); the unknown "
        "threshold removes all usable tap information",
    )


def crlb_quantized_known(blocks: FimBlocks) -> np.ndarray:
    """Asymptotic tap MSE of the 1-bit receiver with a known threshold."""
    return spd_inverse(blocks.j_theta_theta, "1-bit tap information matrix")


def _diag_ratio_mean(numerator: np.ndarray, denominator: np.ndarray) -> float:
    num = np.diagonal(np.atleast_2d(numerator))
    den = np.diagonal(np.atleast_2d(denominator))
    if num.shape != den.shape:
        raise ValueError("bound matrices must have matching shapes")
    if np.any(num <= 0.0) or np.any(den <= 0.0):
        raise ValueError("MSE diagonals must be strictly positive")
    return float(np.mean(num / den))


def loss_chi(mse_y: np.ndarray, mse_z: np.ndarray) -> float:
    """Average tap-wise MSE ratio of the ideal over the 1-bit receiver."""
    return _diag_ratio_mean(mse_y, mse_z)


def loss_chi_star(mse_y: np.ndarray, mse_z_star: np.ndarray) -> float:
    """Same ratio against the known-threshold 1-bit receiver."""
    return _diag_ratio_mean(mse_y, mse_z_star)


def loss_upsilon(mse_z_star: np.ndarray, mse_z: np.ndarray) -> float:
    """Accuracy penalty paid for estimating the threshold along the taps."""
    return _diag_ratio_mean(mse_z_star, mse_z)


def single_tap_closed_forms(theta: float, alpha: float, n_symbols: int) -> dict:
    """Closed-form bounds and losses for one tap on a balanced pilot.

    ``phi_plus`` belongs to the -1 symbols (threshold offset alpha +
    theta) and ``phi_minus`` to the +1 symbols; with a balanced pilot
    each sign carries half the symbol periods.  Agrees with the generic
    matrix pipeline specialized to a single tap.
    """
    if n_symbols < 1:
        raise ValueError("n_symbols must be positive")
    theta = float(theta)
    alpha = float(alpha)
    n = float(n_symbols)
    phi_plus = phi_n(-theta, alpha)
    phi_minus = phi_n(theta, alpha)
    total = phi_plus + phi_minus
    return {
        "mse_z": total / (2.0 * n * phi_plus * phi_minus),
        "mse_z_star": 2.0 / (n * total),
        "chi": 2.0 * phi_plus * phi_minus / total,
        "chi_star": 0.5 * total,
        "upsilon": 4.0 * phi_plus * phi_minus / (total * total),
    }


@dataclass(frozen=True)
class LowSnrLimits:
    """Zero-signal limits of the 1-bit bounds for a given threshold.

    ``growth_ok`` is False when the pilot's summed-regressor outer
    product is not bounded by the sample count, which would invalidate
    the simplification behind ``mse_z_limit``.
    """

    mse_z_limit: np.ndarray
    chi_limit: float
    growth_ok: bool
    growth_bound: float


def low_snr_limits(pilot: PilotDesign, alpha: float) -> LowSnrLimits:
    """Limits of the 1-bit bounds as the tap vector shrinks to zero.

    Both the unknown- and known-threshold MSE matrices collapse onto the
    same scaled ideal bound, and the quantization loss tends to the
    zero-signal attenuation factor.
    """
    alpha = float(alpha)
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")
    f_sum = pilot.regressor_sum
    growth_bound = float(np.max(np.abs(np.outer(f_sum, f_sum))))
    factor = phi_zero(alpha)
    return LowSnrLimits(
        mse_z_limit=crlb_ideal(pilot) / factor,
        chi_limit=factor,
        growth_ok=growth_bound <= pilot.n_symbols,
        growth_bound=growth_bound,
    )
