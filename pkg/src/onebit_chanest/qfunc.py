"""Numerically stable scalar primitives for the 1-bit measurement model.

Everything here accepts scalars or numpy arrays and is evaluated through
log-space, so tail quantities remain finite and accurate far past the
point where Q(x) or Q(x) - Q(x)^2 would underflow in double precision.
"""

from __future__ import annotations

import numpy as np
from scipy import special

_LOG_2PI = float(np.log(2.0 * np.pi))
_SQRT2 = float(np.sqrt(2.0))


def _checked(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def _like_input(out, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return float(out)
    return out


def q_function(x):
    """Upper tail probability of the standard normal distribution.

    Q(x) = P(X > x) for X ~ N(0, 1), computed through erfc so both tails
    keep full relative accuracy.  Monotone decreasing, Q(-x) = 1 - Q(x).
    """
    arr = _checked(x, "x")
    return _like_input(0.5 * special.erfc(arr / _SQRT2), x)


def log_q_function(x):
    """Natural logarithm of ``q_function``.

    Delegates to the log of the normal CDF at the reflected argument,
    which switches to an asymptotic tail expansion internally and stays
    accurate for arguments of several hundred in magnitude.
    """
    arr = _checked(x, "x")
    return _like_input(special.log_ndtr(-arr), x)


def log_normal_pdf(x):
    """Log of the standard normal density, ``-x^2/2 - ln(2 pi)/2``."""
    arr = _checked(x, "x")
    return _like_input(-0.5 * arr * arr - 0.5 * _LOG_2PI, x)


def phi_n(s, alpha):
    """Per-sample information attenuation factor of the hard limiter.

    With d = alpha - s this is exp(-d^2) / (2 pi (Q(d) - Q(d)^2)).
    Since Q(d) - Q(d)^2 = Q(d) Q(-d), the value is formed as
    exp(-d^2 - ln Q(d) - ln Q(-d)) / (2 pi); the naive denominator
    underflows beyond |d| of about 6.  Strictly positive everywhere.
    """
    s_arr = _checked(s, "s")
    a_arr = _checked(alpha, "alpha")
    d = a_arr - s_arr
    out = np.exp(-d * d - special.log_ndtr(-d) - special.log_ndtr(d) - _LOG_2PI)
    return _like_input(out, s, alpha)


def log_phi_n(s, alpha):
    """Natural log of ``phi_n``; finite for any finite arguments.

    ``phi_n`` itself underflows once the exponent passes about -745,
    which tail integrals against wide priors do reach.
    """
    s_arr = _checked(s, "s")
    a_arr = _checked(alpha, "alpha")
    d = a_arr - s_arr
    out = -d * d - special.log_ndtr(-d) - special.log_ndtr(d) - _LOG_2PI
    return _like_input(out, s, alpha)


def phi_zero(alpha):
    """Zero-signal limit of ``phi_n``; equals 2/pi at a symmetric threshold."""
    return phi_n(0.0, alpha)
