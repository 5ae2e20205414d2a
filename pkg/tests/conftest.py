"""Shared test oracles.

The enumeration oracle computes the 1-bit information matrix the
expensive way: exact expectation of the score outer product over all
2^N output words, with scores obtained by complex-step differentiation
of the log-probability.  It shares no simplification with the library
path, so agreement pins down the analytic attenuation-factor form.
"""

from itertools import product

import numpy as np
from scipy import special

from onebit_chanest.pilots import PilotDesign

_CS_STEP = 1e-20


def _log_prob_word(z, regressors, psi):
    """Log-probability of one output word; complex safe."""
    k = regressors.shape[1]
    theta, alpha = psi[:k], psi[k]
    w = z * (alpha - regressors @ theta)
    return np.sum(np.log(0.5 * special.erfc(w / np.sqrt(2.0))))


def enumeration_fim(pilot: PilotDesign, theta, alpha: float) -> np.ndarray:
    """Exact (K+1) x (K+1) information matrix by output enumeration."""
    x = pilot.regressors
    n, k = x.shape
    psi = np.concatenate([np.asarray(theta, dtype=float), [float(alpha)]])
    fim = np.zeros((k + 1, k + 1))
    for bits in product((-1.0, 1.0), repeat=n):
        z = np.array(bits)
        prob = float(np.exp(_log_prob_word(z, x, psi)))
        score = np.empty(k + 1)
        for j in range(k + 1):
            shifted = psi.astype(complex)
            shifted[j] += 1j * _CS_STEP
            score[j] = np.imag(_log_prob_word(z, x, shifted)) / _CS_STEP
        fim += prob * np.outer(score, score)
    return fim


def manual_pilot(symbols, taps, strict=False) -> PilotDesign:
    """Pilot built directly from a symbol list, bypassing the shuffler."""
    return PilotDesign(np.asarray(symbols, dtype=float), taps, strict=strict)


def balanced_single_tap_pilot(n_symbols: int) -> PilotDesign:
    """Alternating +-1 pilot with one tap; balanced by construction."""
    symbols = np.tile([1.0, -1.0], n_symbols // 2)
    return PilotDesign(symbols, 1)


def random_spd_scenario(rng, taps, n_symbols, max_signal=3.0, alpha_span=2.0):
    """Random pilot and parameters with the signal range kept bounded."""
    from onebit_chanest.pilots import ChannelParams, make_pilot

    pilot = make_pilot(n_symbols, taps, int(rng.integers(0, 2**31)))
    theta = rng.standard_normal(taps)
    scale = max_signal / max(float(np.max(np.abs(pilot.regressors @ theta))), 1e-9)
    theta = theta * min(1.0, scale)
    alpha = float(rng.uniform(-alpha_span, alpha_span))
    return pilot, ChannelParams(theta, alpha)
