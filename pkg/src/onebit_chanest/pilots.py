"""BPSK pilot construction, the linear ISI observation map, and samplers."""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import RankDeficiencyError

_PILOT_RETRIES = 32
_GRAM_COND_LIMIT = 1e8


@dataclass(frozen=True)
class PilotDesign:
    """Balanced BPSK pilot and its tap-wise regressors.

    ``regressors`` holds one row per symbol period; row n stacks the
    current and the taps-1 preceding symbols, cyclically extended at the
    start of the sequence, so the noiseless receive sample at period n
    is ``regressors[n] @ theta``.  The cyclic extension keeps the
    coordinate-wise symbol sums exactly zero.

    ``strict=False`` skips the structural checks; it exists for test
    oracles that need short or unbalanced symbol streams and is not part
    of the supported surface.
    """

    symbols: np.ndarray
    taps: int
    strict: InitVar[bool] = True

    def __post_init__(self, strict):
        symbols = np.asarray(self.symbols, dtype=float)
        symbols.setflags(write=False)
        object.__setattr__(self, "symbols", symbols)
        if symbols.ndim != 1 or symbols.size == 0:
            raise ValueError("symbols must be a non-empty 1-D sequence")
        if not np.all(np.abs(symbols) == 1.0):
            raise ValueError("pilot symbols must be +1 or -1")
        if self.taps < 1:
            raise ValueError("taps must be a positive integer")
        if strict:
            n = symbols.size
            if n % 2 != 0:
                raise ValueError(f"pilot length must be even, got {n}")
            if symbols.sum() != 0.0:
                raise ValueError("pilot symbols must sum to zero")
            if n < 2 * self.taps:
                raise ValueError(
                    f"pilot length {n} must be at least twice the tap count {self.taps}"
                )

    @property
    def n_symbols(self) -> int:
        return self.symbols.size

    @cached_property
    def regressors(self) -> np.ndarray:
        n = self.n_symbols
        idx = (np.arange(n)[:, None] - np.arange(self.taps)[None, :]) % n
        out = self.symbols[idx]
        out.setflags(write=False)
        return out

    @cached_property
    def regressor_outer(self) -> np.ndarray:
        x = self.regressors
        out = x[:, :, None] * x[:, None, :]
        out.setflags(write=False)
        return out

    @cached_property
    def gram(self) -> np.ndarray:
        """Sum of the rank-1 regressor outer products, a K x K matrix."""
        x = self.regressors
        out = x.T @ x
        out.setflags(write=False)
        return out

    @cached_property
    def regressor_sum(self) -> np.ndarray:
        out = self.regressors.sum(axis=0)
        out.setflags(write=False)
        return out


@dataclass(frozen=True)
class ChannelParams:
    """Tap gains plus the comparator threshold, the full unknown vector."""

    theta: np.ndarray
    alpha: float

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "alpha", float(self.alpha))
        if not (np.all(np.isfinite(theta)) and np.isfinite(self.alpha)):
            raise ValueError("channel parameters must be finite")

    @property
    def psi(self) -> np.ndarray:
        return np.concatenate([self.theta, [self.alpha]])


@dataclass(frozen=True)
class GaussianPrior:
    """Zero-mean Gaussian prior on the taps with a diagonal covariance."""

    variances: np.ndarray

    def __post_init__(self):
        var = np.atleast_1d(np.asarray(self.variances, dtype=float))
        var.setflags(write=False)
        object.__setattr__(self, "variances", var)
        if not np.all(np.isfinite(var)) or np.any(var <= 0.0):
            raise ValueError("prior variances must be positive and finite")

    @property
    def taps(self) -> int:
        return self.variances.size

    @property
    def stddevs(self) -> np.ndarray:
        return np.sqrt(self.variances)

    @property
    def precisions(self) -> np.ndarray:
        """Diagonal of the prior information matrix, 1 over each variance."""
        return 1.0 / self.variances


def make_pilot(n_symbols: int, taps: int, seed: int) -> PilotDesign:
    """Draw a balanced random BPSK pilot, deterministic in ``seed``.

    Exactly half the symbols are +1.  A candidate whose Gram matrix is
    numerically ill conditioned is rejected and reshuffled a bounded
    number of times, since every ideal-receiver bound needs its inverse.
    """
    if n_symbols < 2 or n_symbols % 2 != 0:
        raise ValueError(f"n_symbols must be a positive even integer, got {n_symbols}")
    if taps < 1:
        raise ValueError(f"taps must be a positive integer, got {taps}")
    if n_symbols < 2 * taps:
        raise ValueError(f"n_symbols ({n_symbols}) must be at least 2 * taps ({2 * taps})")
    rng = np.random.default_rng(seed)
    base = np.concatenate([np.ones(n_symbols // 2), -np.ones(n_symbols // 2)])
    for _ in range(_PILOT_RETRIES):
        pilot = PilotDesign(rng.permutation(base), taps)
        if np.linalg.cond(pilot.gram) < _GRAM_COND_LIMIT:
            return pilot
    raise RankDeficiencyError(
        f"no pilot with an invertible regressor Gram matrix found in "
        f"{_PILOT_RETRIES} shuffles (n_symbols={n_symbols}, taps={taps})"
    )


def signal_value(pilot: PilotDesign, theta, n: int) -> float:
    """Noiseless receive value at symbol period ``n`` (periods count from 1)."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (pilot.taps,):
        raise ValueError(f"theta must have length {pilot.taps}")
    if not 1 <= n <= pilot.n_symbols:
        raise IndexError(f"symbol period {n} outside 1..{pilot.n_symbols}")
    return float(pilot.regressors[n - 1] @ theta)


def signal_vector(pilot: PilotDesign, theta) -> np.ndarray:
    """All N noiseless receive values at once."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (pilot.taps,):
        raise ValueError(f"theta must have length {pilot.taps}")
    return pilot.regressors @ theta


def sample_ideal(pilot: PilotDesign, theta, rng: np.random.Generator) -> np.ndarray:
    """One noisy receive vector of the full-resolution receiver.

    Additive white Gaussian noise with unit variance; the caller owns
    the generator, so concurrency and reproducibility are its choice.
    """
    return signal_vector(pilot, theta) + rng.standard_normal(pilot.n_symbols)


def quantize(y, alpha: float) -> np.ndarray:
    """Hard-limit a receive vector against the threshold.

    Exact ties map to +1, matching the sign convention of the receiver.
    """
    y = np.asarray(y, dtype=float)
    return np.where(y - alpha >= 0.0, 1.0, -1.0)


def sample_quantized(
    pilot: PilotDesign, params: ChannelParams, rng: np.random.Generator
) -> np.ndarray:
    """One +-1 output vector of the 1-bit receiver."""
    return quantize(sample_ideal(pilot, params.theta, rng), params.alpha)


def save_pilot_symbols(pilot: PilotDesign, path) -> None:
    """Write the symbol stream as plain text, one +-1 entry per line."""
    lines = "\n".join(f"{int(s):+d}" for s in pilot.symbols)
    Path(path).write_text(lines + "\n", encoding="utf-8")


def load_pilot_symbols(path, taps: int) -> PilotDesign:
    """Rebuild a pilot from a plain text symbol file."""
    values = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            value = int(line)
        except ValueError as exc:
            raise ValueError(f"{path}: line {i}: expected +1 or -1, got {line!r}") from exc
        if value not in (-1, 1):
            raise ValueError(f"{path}: line {i}: expected +1 or -1, got {value}")
        values.append(float(value))
    return PilotDesign(np.asarray(values), taps)
